import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from distcorr.correlations import quantum_correlations
from distcorr.distances import RELATIVE_ENTROPY
from distcorr.measurements import KrausChannel, apply_channel
from distcorr.optimize import OptimizerConfig
from distcorr.state_space import partial_trace_array, random_density, random_density_array, von_neumann_entropy
from distcorr.verify import (
    CheckResult,
    exchange_quantity,
    run_suite,
    swap_last_two,
    verify_distance_axioms,
    verify_measure_conditions,
    verify_prop_vi_preconditions,
)

ALL_AXIOMS = {"a_non_negativity", "b_identity_of_indiscernibles", "c_symmetry", "d_triangle",
              "e_unitary_invariance", "f_cptp_monotonicity", "g_convexity_first_argument",
              "h_cq_decomposition", "restricted_additivity"}


def names(result):
    return {c.name for c in result.checks}


class TestDistanceSuite:
    def test_trace_runs_everything(self):
        res = verify_distance_axioms("trace", 30, seed=1)
        assert names(res) == ALL_AXIOMS
        assert res.passed

    def test_relative_entropy_skips_unclaimed(self):
        res = verify_distance_axioms("relative_entropy", 30, seed=1)
        assert names(res) == ALL_AXIOMS - {"c_symmetry", "d_triangle"}
        assert res.passed

    @pytest.mark.parametrize("name", ["qjsd", "bures_sq", "hellinger_sq"])
    def test_no_triangle(self, name):
        res = verify_distance_axioms(name, 30, seed=1)
        assert names(res) == ALL_AXIOMS - {"d_triangle"}
        assert res.passed

    def test_reproducible(self):
        a = verify_distance_axioms("bures_sq", 10, seed=4).to_json()
        b = verify_distance_axioms("bures_sq", 10, seed=4).to_json()
        assert a == b

    def test_seed_matters(self):
        a = verify_distance_axioms("trace", 5, seed=4).check("c_symmetry").residuals
        b = verify_distance_axioms("trace", 5, seed=5).check("c_symmetry").residuals
        assert a != b

    def test_bad_samples(self):
        with pytest.raises(ValueError):
            verify_distance_axioms("trace", 0)

    def test_self_describing_json(self):
        data = json.loads(verify_distance_axioms("trace", 3, seed=0).to_json())
        for c in data["checks"]:
            assert {"name", "samples", "violations", "worst_residual", "tolerance", "verdict",
                    "fixture"} <= set(c)
            assert c["fixture"]
            assert c["violations"] <= c["samples"]


class TestVerdicts:
    def test_pass_iff_no_violations(self):
        assert CheckResult("x", 3, 0, 0.0, 1e-9).verdict == "pass"
        assert CheckResult("x", 3, 1, 1.0, 1e-9).verdict == "fail"
        assert CheckResult("x", 3, 1, 1.0, 1e-9, asserted=False).verdict == "reported"


class TestMeasureSuite:
    def test_small_run_passes(self):
        res = verify_measure_conditions("relative_entropy", 4, seed=2)
        assert res.passed
        assert {"1_product_total", "2_local_unitary_classical", "3_nonneg_quantum",
                "4_total_local_channel", "5_cq_classical_equality",
                "5_sandwich_total_vs_fixed_measurement"} <= names(res)

    def test_qutrit_qubit_dims(self):
        res = verify_measure_conditions("trace", 2, seed=2, dims=(3, 2),
                                        cfg=OptimizerConfig(restarts=4))
        assert res.passed


class TestPropVI:
    def test_swap_is_involution(self, rng):
        m = random_density_array(12, seed=rng)
        once = swap_last_two(m, (2, 3, 2))
        assert_allclose(swap_last_two(once, (2, 2, 3)), m, atol=0)
        assert_allclose(partial_trace_array(once, (2, 2, 3), [1]),
                        partial_trace_array(m, (2, 3, 2), [2]), atol=1e-15)

    def test_exchange_quantity_is_conditional_mutual_information(self, rng):
        dims = (2, 2, 2)
        s = random_density_array(8, seed=rng)
        def h(keep):
            return von_neumann_entropy(partial_trace_array(s, dims, keep))
        cmi = h([0, 1]) + h([0, 2]) - h([0]) - h([0, 1, 2])
        assert_allclose(exchange_quantity(RELATIVE_ENTROPY, s, dims), cmi, atol=1e-10)

    def test_relative_entropy_asserts_all(self):
        res = verify_prop_vi_preconditions("relative_entropy", 4, seed=3)
        assert all(c.asserted for c in res.checks)
        assert res.passed

    def test_trace_reports_without_asserting(self):
        res = verify_prop_vi_preconditions("trace", 4, seed=3)
        assert res.check("i_restricted_additivity").asserted
        assert not res.check("ii_exchange_invariance").asserted
        assert not res.check("iii_quantum_monotone_under_B_channels").asserted
        assert res.check("ii_exchange_invariance").verdict in ("pass", "reported")
        assert len(res.check("ii_exchange_invariance").residuals) == 4
        assert res.passed

    @pytest.mark.parametrize("name", ["relative_entropy", "trace", "qjsd"])
    def test_identity_channel_no_change(self, name, rng):
        rho = random_density((2, 2), seed=rng)
        same = apply_channel(rho, KrausChannel((np.eye(2),), target="B"))
        q0 = quantum_correlations(name, rho).quantum
        q1 = quantum_correlations(name, same).quantum
        assert abs(q1 - q0) <= 2e-6


def test_run_suite_subset():
    results = run_suite("distances", 3, seed=0, distances=["trace", "qjsd"])
    assert [r.distance for r in results] == ["trace", "qjsd"]
