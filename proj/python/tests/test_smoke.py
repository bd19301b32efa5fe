# Copyright 2026 The eend Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import numpy as np
import pytest

import eend

SMALL_MODEL = "arch=sa_eend\nin_dim=345\nmodel_dim=8\nheads=2\nffn_dim=16\nblocks=1\nspeakers=2\n"


def test_version_is_a_string():
    assert isinstance(eend.version(), str) and eend.version()


def test_features_have_the_spliced_shape():
    rng = np.random.default_rng(0)
    samples = rng.uniform(-0.5, 0.5, 8000)
    f = eend.extract_features(samples)
    assert f.shape == (10, 345)
    assert np.all(np.isfinite(f))


def test_pit_loss_picks_the_swapped_permutation():
    z = np.array([[0.9, 0.1], [0.8, 0.2]])
    labels = np.array([[0.0, 1.0], [0.0, 1.0]])
    loss, perm = eend.pit_loss(z, labels)
    assert perm == [1, 0]
    expected = -(np.log(0.9) + np.log(0.9) + np.log(0.8) + np.log(0.8)) / 4
    assert loss == pytest.approx(expected, rel=1e-12)


def test_model_posteriors_lie_in_the_open_unit_interval(tmp_path):
    model = eend.Model.init(SMALL_MODEL, seed=1)
    assert model.in_dim == 345 and model.speakers == 2
    x = np.random.default_rng(1).normal(size=(20, 345))
    z = model.posteriors(x)
    assert z.shape == (20, 2)
    assert np.all((z > 0) & (z < 1))
    path = tmp_path / "m.eend"
    model.save(str(path))
    assert np.array_equal(eend.Model.load(str(path)).posteriors(x), z)


def test_score_of_identical_rttm_is_zero():
    ref = "SPEAKER r 1 0.00 2.00 <NA> <NA> A <NA> <NA>\n"
    report = eend.score(ref, ref)
    assert report["der"] == 0.0
    assert set(report) >= {"der", "mi", "fa", "cf"}


def test_errors_map_to_python_exceptions():
    with pytest.raises(eend.FormatError):
        eend.score("not an rttm line\n", "")
    with pytest.raises(eend.Error):
        eend.extract_features(np.zeros(10))


def test_cli_reports_usage_errors():
    code, _, err = eend.run_cli(["simulate", "--beta", "-1"])
    assert code == 2
    assert err
