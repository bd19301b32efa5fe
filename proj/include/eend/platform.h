// Copyright 2026 The eend Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Process-level runtime settings for long-running entry points.

#ifndef EEND_PLATFORM_H_
#define EEND_PLATFORM_H_

namespace eend {

// Training allocates and frees many tensors of the same few sizes per step.
// With glibc defaults the large ones are mmap-ed and unmapped every time, so
// each step pays for zero-filled page faults. This raises the mmap and trim
// thresholds so freed buffers are reused from the heap. No effect on other C
// libraries. Call once, before heavy work.
void ConfigureAllocator();

}  // namespace eend

#endif  // EEND_PLATFORM_H_
