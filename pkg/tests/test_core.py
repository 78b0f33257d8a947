import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pacsafe.core import (BallSet, BoxSet, Method, PacParams, SafeSet, SublevelSet, as_vector)
from pacsafe.errors import ConfigError, SamplingError
from pacsafe.rng import RngStream


class TestMembership:
    def test_ball_centre_and_boundary(self):
        ball = BallSet([0, 0], 0.64)
        assert ball.contains([0, 0])
        assert not ball.contains([0.8, 0.001])
        assert BallSet([0, 0], 1.0).contains([1.0, 0.0])  # inclusive boundary

    def test_box_boundary_inclusive(self):
        box = BoxSet([-3, -3], [3, 3])
        assert box.contains([3, 3])
        assert not box.contains([3.0000001, 0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            BoxSet([0, 0], [1, 1]).contains([0.5])
        with pytest.raises(ValueError):
            BallSet([0, 0], 1).contains_batch(np.zeros((3, 3)))

    def test_sublevel(self):
        s = SublevelSet(lambda X: X[:, 0] ** 2 + X[:, 1] ** 2 - 1, [-1, -1], [1, 1])
        assert s.contains([0.5, 0.5])
        assert not s.contains([0.9, 0.9])
        with pytest.raises(ConfigError):
            s.to_dict()

    def test_batch_shapes(self):
        ball = BallSet([0, 0, 0], 1)
        X = np.zeros((4, 5, 3))
        assert ball.contains_batch(X).shape == (4, 5)


class TestSafeSetConstruction:
    def test_degenerate_bbox_rejected(self):
        with pytest.raises(ConfigError):
            BoxSet([0, 1], [1, 1])

    def test_ball_radius_positive(self):
        with pytest.raises(ConfigError):
            BallSet([0, 0], 0.0)

    def test_roundtrip_dict(self):
        for s in (BoxSet([-1, 0], [1, 2]), BallSet([0.5, 0], 0.64)):
            t = SafeSet.from_dict(s.to_dict())
            assert type(t) is type(s)
            assert np.array_equal(t.bbox_lo, s.bbox_lo)
            assert np.array_equal(t.bbox_hi, s.bbox_hi)

    def test_from_dict_errors(self):
        with pytest.raises(ConfigError):
            SafeSet.from_dict({"kind": "torus"})
        with pytest.raises(ConfigError):
            SafeSet.from_dict({"kind": "box", "lo": [0]})

    def test_check_bbox_detects_bad_bbox(self):
        BallSet([0, 0], 1).check_bbox(RngStream(0, 0), 1000)
        # a sublevel set whose centre is not a member
        hollow = SublevelSet(lambda X: 0.25 - (X ** 2).sum(axis=1), [-1, -1], [1, 1])
        with pytest.raises(ConfigError):
            hollow.check_bbox(RngStream(0, 0), 100)


class TestSampling:
    def test_box_direct(self):
        pts = BoxSet([0, 0], [1, 1]).sample(RngStream(0, 0), 1000)
        assert np.all((pts >= 0) & (pts <= 1))

    def test_ball_uniform_statistics(self):
        pts = BallSet([0, 0], 1).sample(RngStream(0, 0), 100_000)
        assert np.all(np.abs(pts.mean(axis=0)) < 0.02)
        inner = np.mean((pts ** 2).sum(axis=1) <= 0.25)
        assert abs(inner - 0.25) < 0.01

    def test_members_and_in_bbox(self):
        for s in (BallSet([0, 0], 0.64), BallSet([0] * 4, 1), BoxSet([-1] * 3, [1] * 3)):
            pts = s.sample(RngStream(1, 0), 10_000)
            assert np.all(s.contains_batch(pts))
            assert np.all((pts >= s.bbox_lo) & (pts <= s.bbox_hi))

    def test_reproducible_and_batch_independent(self):
        ball = BallSet([0, 0], 1)
        r1 = RngStream(5, 0)
        a = ball.sample(r1, 300)
        b = ball.sample(r1, 200)
        r2 = RngStream(5, 0)
        c = ball.sample(r2, 500)
        assert np.array_equal(np.vstack([a, b]), c)

    def test_rejection_cap(self):
        thin = SublevelSet(lambda X: np.ones(X.shape[0]), [0, 0], [1, 1])
        with pytest.raises(SamplingError):
            thin.sample(RngStream(0, 0), 2)


class TestParams:
    def test_defaults_valid(self):
        p = PacParams()
        assert p.method is Method.RBC1_SCENARIO

    @pytest.mark.parametrize("field", ["alpha1", "alpha2", "delta", "delta1", "delta2", "l", "tau", "gamma"])
    @pytest.mark.parametrize("value", [0.0, 1.0, -0.1, 1.5])
    def test_probabilities_open_interval(self, field, value):
        with pytest.raises(ConfigError):
            PacParams(**{field: value})

    def test_hypothesis_alpha1_l_delta2(self):
        PacParams(method="rbc2", alpha1=0.01, l=0.2, delta2=0.999)
        with pytest.raises(ConfigError, match="alpha1 < l\\*delta2"):
            PacParams(method="rbc2", alpha1=0.2, l=0.2, delta2=0.999)
        with pytest.raises(ConfigError):
            PacParams(method="sbc3", alpha1=0.3, l=0.2, delta2=0.999, U_a=1.1)
        # the one-to-one method has no such hypothesis
        PacParams(method="rbc1", alpha1=0.3, l=0.2)

    def test_xi_bar_exceeds_minus_C(self):
        with pytest.raises(ConfigError):
            PacParams(xi_bar=1.0, C=-1.0)
        PacParams(xi_bar=1.5, C=-1.0)

    def test_sbc_U_a_at_least_one(self):
        with pytest.raises(ConfigError):
            PacParams(method="sbc3", alpha1=0.01, U_a=0.5)

    def test_misc_fields(self):
        for bad in (dict(C=0.5), dict(U_a=0), dict(kappa=-1), dict(N_o=0), dict(vc_dim=0)):
            with pytest.raises(ConfigError):
                PacParams(**bad)

    @settings(max_examples=200, deadline=None)
    @given(a1=st.floats(0.001, 0.999), l=st.floats(0.001, 0.999), d2=st.floats(0.001, 0.999))
    def test_validation_matches_inequality(self, a1, l, d2):
        ok = a1 < l * d2
        try:
            PacParams(method="rbc2", alpha1=a1, l=l, delta2=d2)
            accepted = True
        except ConfigError:
            accepted = False
        assert accepted == ok

    def test_dict_roundtrip_and_unknown(self):
        p = PacParams(method="sbc3", alpha1=0.01, kappa=10, tau=0.02, U_a=1.5)
        assert PacParams.from_dict(p.to_dict()) == p
        with pytest.raises(ConfigError):
            PacParams.from_dict({"alpha9": 0.1})

    def test_method_aliases(self):
        assert Method.parse("RBC-II") is Method.RBC2
        assert Method.parse("sbc3") is Method.SBC3
        with pytest.raises(ConfigError):
            Method.parse("sos")


def test_as_vector_checks():
    assert as_vector([1, 2]).shape == (2,)
    with pytest.raises(ValueError):
        as_vector([1, np.nan])
    with pytest.raises(ValueError):
        as_vector([1, 2], dim=3)
