import math

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from tgalign.objective import (NegativeSampler, alignment_loss, global_loss, sample_negatives,
                               smooth_l1, task_loss, total_loss)
from tgalign.temporal import IntensityVector

f64 = torch.float64


def _t(*v):
    return torch.tensor(v, dtype=f64)


def test_sampler_never_draws_zero_degree():
    s = NegativeSampler(np.array([0, 5, 5]), seed=0)
    assert 0 not in set(s.draw(10_000).tolist())
    assert s.probs.sum() == pytest.approx(1.0)


def test_sampler_frequencies():
    s = NegativeSampler(np.array([1, 3]), seed=1)
    freq = np.bincount(s.draw(100_000), minlength=2) / 100_000
    assert freq == pytest.approx([0.25, 0.75], abs=0.01)


def test_sampler_chi_square_fit():
    degrees = np.array([0, 1, 2, 3, 5, 8, 13, 21, 34, 0, 55])
    s = NegativeSampler(degrees, seed=7)
    counts = np.bincount(s.draw(100_000), minlength=len(degrees))
    support = degrees > 0
    assert counts[~support].sum() == 0
    expected = degrees[support] / degrees.sum() * 100_000
    assert chisquare(counts[support], expected).pvalue > 0.01


def test_sampler_rejections():
    with pytest.raises(ValueError):
        NegativeSampler(np.array([4]))
    s = NegativeSampler(np.array([2, 2, 2]), seed=0)
    with pytest.raises(ValueError):
        s.sample(0, 0)


def test_sample_negatives_count_and_exclusion():
    s = NegativeSampler(np.array([3, 1, 1, 1, 1]), seed=3)
    assert len(sample_negatives(s, 0, 1)) == 1
    negs = sample_negatives(s, 0, 5, partner=1)
    assert len(negs) == 5 and not {0, 1} & set(negs)


def test_task_loss_hand_value():
    loss = task_loss(_t(0.0)[0], [_t(0.0)[0]])
    assert loss.item() == pytest.approx(1.006409, abs=1e-6)
    assert loss.item() == pytest.approx(math.log(2) + math.log(1 + math.exp(-1)), abs=1e-12)


def test_task_loss_saturates_for_strong_positive():
    assert task_loss(_t(60.0)[0], [_t(-1e6)[0]]).item() < 1e-12


def test_task_loss_reduces_intensity_vectors():
    pos = IntensityVector(_t(-0.5, 0.5))
    negs = IntensityVector(_t(0.25, -0.25)[None])  # one negative, scalar 0
    assert task_loss(pos, negs).item() == pytest.approx(1.006409, abs=1e-6)
    conv = task_loss(pos, negs, neg_form="conventional").item()
    assert conv == pytest.approx(2 * math.log(2), abs=1e-12)
    with pytest.raises(ValueError):
        task_loss(pos, negs, neg_form="other")


def test_smooth_l1_examples():
    assert alignment_loss(IntensityVector(_t(1.0, -2.0)), IntensityVector(_t(1.0, -2.0))).item() == 0.0
    assert alignment_loss(IntensityVector(_t(0.5, 0.5)), IntensityVector(_t(0.0, 0.0))).item() == 0.125
    assert alignment_loss(IntensityVector(_t(2.0, -2.0)), IntensityVector(_t(0.0, 0.0))).item() == 1.5
    with pytest.raises(ValueError):
        alignment_loss(IntensityVector(_t(1.0)), IntensityVector(_t(1.0, 2.0)))


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=6), st.data())
def test_alignment_identity_and_positivity(values, data):
    v = IntensityVector(torch.tensor(values, dtype=f64))
    assert alignment_loss(v, v).item() == 0.0
    shift = data.draw(st.floats(1e-3, 10.0))
    w = IntensityVector(v.vec + shift)
    assert alignment_loss(v, w).item() > 0


def test_smooth_l1_is_c1_at_threshold():
    h = 1e-6
    for sign in (1.0, -1.0):
        pts = torch.tensor([sign * (1 - h), sign * (1 + h)], dtype=f64, requires_grad=True)
        vals = smooth_l1(pts)
        vals.sum().backward()
        assert abs(vals[0].item() - vals[1].item()) < 2e-6
        assert abs(pts.grad[0].item() - pts.grad[1].item()) < 2e-6
        assert pts.grad[0].item() == pytest.approx(sign, abs=2e-6)


def test_global_loss_examples():
    z = _t(0.3, -0.7)
    zero = torch.zeros(2, dtype=f64)
    half = torch.full((2,), 0.5, dtype=f64)
    assert global_loss(z, z, z, zero, zero).item() == pytest.approx(math.log(2), abs=1e-12)
    assert global_loss(z, z, z, zero, zero).item() == pytest.approx(0.693147, abs=1e-6)
    # ||alpha||^2 + ||beta||^2 = (0.25 + 0.25) + (0.25 + 0.25) in either sign convention
    for literal in (False, True):
        diff = global_loss(z, z, z, half, half, literal) - global_loss(z, z, z, zero, zero, literal)
        assert diff.item() == pytest.approx(1.0, abs=1e-15)
        only_alpha = global_loss(z, z, z, half, zero, literal) - global_loss(z, z, z, zero, zero, literal)
        assert only_alpha.item() == pytest.approx(0.5, abs=1e-15)


@given(st.floats(0.0, 50.0), st.floats(1e-3, 10.0))
def test_global_loss_grows_away_from_center(r, step):
    zg, zy, zero = _t(0.1, 0.2), _t(0.3, -0.1), torch.zeros(2, dtype=f64)
    direction = _t(0.6, 0.8)
    near = global_loss(zg + r * direction, zy, zg, zero, zero).item()
    far = global_loss(zg + (r + step) * direction, zy, zg, zero, zero).item()
    assert far >= near


def test_literal_global_loss_unbounded_below_on_a_ray():
    zg, zero = torch.zeros(2, dtype=f64), torch.zeros(2, dtype=f64)
    direction = _t(1.0, 0.0)
    values = [global_loss(r * direction, zg, zg, zero, zero, literal=True).item()
              for r in (1, 10, 100, 1000)]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert values[-1] < -1e5


def test_total_loss_examples():
    assert total_loss(1.0, 2.0, 3.0, 0.0, 0.0).total.item() == 1.0
    parts = total_loss(1.0, 2.0, 3.0, 0.5, 0.1)
    assert parts.total.item() == pytest.approx(2.3, abs=1e-12)
    assert parts.as_floats() == pytest.approx({"task": 1.0, "align": 2.0, "global": 3.0, "total": 2.3})
    with pytest.raises(ValueError):
        total_loss(1.0, 2.0, 3.0, -0.1, 0.0)


@settings(max_examples=50)
@given(*(st.floats(-100, 100) for _ in range(3)), st.floats(0, 5), st.floats(0, 5), st.floats(-3, 3))
def test_total_loss_linear_in_components(task, align, glob, e1, e2, bump):
    base = total_loss(task, align, glob, e1, e2).total.item()
    assert total_loss(task + bump, align, glob, e1, e2).total.item() == pytest.approx(base + bump, abs=1e-9)
    assert total_loss(task, align + bump, glob, e1, e2).total.item() == pytest.approx(base + e1 * bump, abs=1e-9)
    assert total_loss(task, align, glob + bump, e1, e2).total.item() == pytest.approx(base + e2 * bump, abs=1e-9)
