import numpy as np
import pytest
from hypothesis import given, settings

from sbtop import DataTriple, RecoveryError, check_theorem1, predict, recover_parameters
from sbtop.recovery import degrees_of_freedom, minimal_branch_scale
from sbtop.transforms import AdmissibilityError, feasible_c_range, solve_scaling, verify_invariance

from conftest import params_strategy, random_params, reference_design_2x2


def recover(params, mode="nonnegative"):
    data = predict(params)
    return data, recover_parameters(data, check_theorem1(data), mode=mode)


def assert_reproduces(model, data, atol=1e-8):
    again = predict(model.params)
    for name in ("P", "T", "Tw"):
        np.testing.assert_allclose(getattr(again, name), getattr(data, name), atol=atol, rtol=0, err_msg=name)


class TestGauge:
    def test_reference_design(self):
        data, model = recover(reference_design_2x2())
        assert model.params.pD == pytest.approx(0.40, abs=1e-12)
        assert model.gauge["beta"] == pytest.approx(0.6 * 0.5, abs=1e-12)
        assert_reproduces(model, data, atol=1e-12)

    def test_gauge_quantities(self, rng):
        for _ in range(30):
            params = random_params(rng)
            data, model = recover(params, mode="unrestricted")
            h = model.gauge["h"]
            q = model.params
            assert q.pD == pytest.approx(params.pD, abs=1e-9)
            np.testing.assert_allclose(q.pB / q.pB[h], params.pB / params.pB[h], atol=1e-9)
            np.testing.assert_allclose(q.tB - q.tB[h], params.tB - params.tB[h], atol=1e-8)
            assert q.tD == 0.0 and q.tB[h] == 0.0
            assert q.tF[model.gauge["n"]] == model.gauge["tF_n"]

    def test_some_pF_on_the_boundary(self, rng):
        _, model = recover(random_params(rng, 3, 3), mode="unrestricted")
        pF = model.params.pF
        assert min(pF.min(), 1 - pF.max()) == pytest.approx(0.0, abs=1e-12)

    def test_minimal_branch_scale(self):
        # p(h, j) = .28, .30 at k = .4: the lower bound (.4 - .28)/.4 = .3 binds.
        assert minimal_branch_scale(np.array([0.28, 0.30]), 0.4) == pytest.approx(0.3)


class TestFailures:
    def test_failed_report_rejected(self):
        data = DataTriple(P=np.full((2, 2), 0.3), T=np.ones((2, 2)), Tw=np.ones((2, 2)))
        report = check_theorem1(data)
        with pytest.raises(RecoveryError, match="gauge infeasible"):
            recover_parameters(data, report)

    def test_nonnegative_repair(self, rng):
        repaired = 0
        for _ in range(50):
            params = random_params(rng)
            data, model = recover(params)
            assert model.params.measure_mode == "nonnegative"
            assert_reproduces(model, data)
            p = model.params
            for name in ("tB", "tC", "tD"):
                assert np.all(np.atleast_1d(getattr(p, name)) >= -1e-9), name
            for name, prob in (("tA", p.pA), ("tE", p.pE), ("tF", p.pF)):
                assert np.all(getattr(p, name)[prob > 1e-12] >= -1e-9), name
            repaired += model.gauge["shift"] is not None
        assert repaired > 0

    def test_to_dict(self):
        _, model = recover(reference_design_2x2())
        d = model.to_dict()
        assert set(d) == {"params", "gauge", "fit"}
        assert set(d["gauge"]) >= {"beta", "h", "n", "tD", "tF_n", "tB_h", "shift"}


@settings(max_examples=100, deadline=None)
@given(params_strategy(mode="unrestricted"))
def test_round_trip_and_scaling_link(params):
    data, model = recover(params, mode="unrestricted")
    assert_reproduces(model, data)
    assert max(model.fit.values()) <= 1e-8
    c_min, c_max = feasible_c_range(params)
    beta = model.params.pB[model.gauge["h"]] / params.pB[model.gauge["h"]]
    if c_min - 1e-9 <= beta <= c_max + 1e-9:
        s = solve_scaling(params, model.params, tol=1e-6)
        assert s.c == pytest.approx(beta, rel=1e-9)
        assert verify_invariance(params, model.params, tol=1e-8).passed


class TestDegreesOfFreedom:
    def test_examples(self):
        assert degrees_of_freedom(2, 2) == 3
        assert degrees_of_freedom(3, 4) == 18

    def test_accounting_identity(self):
        for I in range(2, 11):
            for J in range(2, 11):
                accounting = 3 * I * J - (I + J + 1) - (2 + 2 * I + 2 * J) + 6
                assert degrees_of_freedom(I, J) == 3 * (I - 1) * (J - 1) == accounting

    @pytest.mark.parametrize("I,J", [(1, 3), (3, 1), (2.5, 3)])
    def test_invalid(self, I, J):
        with pytest.raises(ValueError):
            degrees_of_freedom(I, J)
