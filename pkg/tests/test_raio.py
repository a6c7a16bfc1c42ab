import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from oracles import naive_kron, naive_partial_trace
from prepsim.collapse import luders_collapse
from prepsim.exceptions import DimensionError, ImplicationError, ImpossibleEventError
from prepsim.raio import (
    CONDITIONS_VIOLATED,
    EQUALITY_VIOLATED,
    VERIFIED,
    RaioInstance,
    RaioReport,
    build_twin_instance,
    check_localization_lemma,
    check_raio_conditions,
    check_raio_equality,
    evolve_prepared_two_routes,
    instance_from_preparation,
    prepared_state,
    random_instance,
)
from prepsim.sampling import (
    random_density,
    random_projector,
    random_subprojector,
    random_unitary,
    rng_from_seed,
)
from prepsim.tensor import (
    Operator,
    Tolerances,
    conjugate,
    identity,
    operator_distance,
    partial_trace,
    trace_distance,
    zero_projector,
)

seeds = st.integers(min_value=0, max_value=2**63)
SQRT_HALF = 1 / math.sqrt(2)


class TestLocalizationLemma:
    def test_f_equals_region(self, rng):
        rho = random_density([6], rng)
        p = random_projector([6], rng)
        assert check_localization_lemma(p, p, rho) < 1e-12

    def test_zero_event(self, rng):
        rho = random_density([4], rng)
        assert check_localization_lemma(zero_projector([4]), random_projector([4], rng), rho) == 0.0

    def test_not_contained(self):
        rho = Operator(np.eye(2) / 2, None, "density")
        f = Operator(np.diag([0.0, 1.0]), None, "projector")
        p = Operator(np.diag([1.0, 0.0]), None, "projector")
        with pytest.raises(ImplicationError):
            check_localization_lemma(f, p, rho)

    def test_region_impossible(self):
        rho = Operator(np.diag([0.0, 1.0]), None, "density")
        p = Operator(np.diag([1.0, 0.0]), None, "projector")
        with pytest.raises(ImpossibleEventError):
            check_localization_lemma(p, p, rho)

    @pytest.mark.parametrize("d", [4, 6, 8])
    def test_random_triples(self, d):
        for seed in range(100):
            rng = rng_from_seed(seed)
            rho = random_density([d], rng)
            p_r = random_projector([d], rng)
            f = random_subprojector(p_r, rng)
            assert check_localization_lemma(f, p_r, rho) < 1e-10


class TestConditions:
    def test_twin_satisfies_all(self):
        rep = check_raio_conditions(build_twin_instance(SQRT_HALF, SQRT_HALF, 4, 2))
        assert rep.cond_i_ok and rep.cond_ii_ok and rep.cond_iii_ok
        assert rep.p_Q == pytest.approx(0.5, abs=1e-12)

    def test_identity_trigger_fails_i(self, rng):
        rho = random_density([2, 2], rng)
        inst = RaioInstance(rho, identity([2, 2]), identity([2, 2]), identity([2, 2]).with_kind("unitary"))
        rep = check_raio_equality(inst)
        assert not rep.cond_i_ok
        assert rep.verdict == CONDITIONS_VIOLATED

    def test_independent_p_fails_ii(self):
        failing = 0
        for seed in range(40):
            inst = build_twin_instance(SQRT_HALF, SQRT_HALF, 4, 2, seed=seed)
            p = random_projector([2, 4], rng_from_seed(10_000 + seed))
            rep = check_raio_conditions(RaioInstance(inst.rho_initial, inst.Q, p, inst.U))
            failing += not rep.cond_ii_ok
        assert failing >= 38

    def test_violating_only_iii_breaks_equality(self):
        # P = U Q U^dag enlarged by one extra direction: (ii) still holds, (iii) does not
        residuals = []
        for seed in range(100):
            inst = build_twin_instance(0.6, 0.8, 4, 2, seed=seed)
            carried = conjugate(inst.Q, inst.U).matrix
            v = (np.eye(8) - carried) @ rng_from_seed(seed).normal(size=8)
            v /= np.linalg.norm(v)
            p = Operator(carried + np.outer(v, v.conj()), [2, 4], "projector")
            rep = check_raio_equality(RaioInstance(inst.rho_initial, inst.Q, p, inst.U))
            assert rep.cond_ii_ok and not rep.cond_iii_ok
            residuals.append(rep.equality_residual)
        exceeding = sum(r > 1e-9 for r in residuals)
        assert exceeding >= 90, sorted(residuals)[:10]

    def test_certainty_eps_monotone(self):
        # a looser certainty threshold can only help (ii)/(iii) and only hurt (i)
        inst = build_twin_instance(0.999, math.sqrt(1 - 0.999**2), 4, 2, seed=3)
        ps = random_projector([2, 4], rng_from_seed(5))
        broken = RaioInstance(inst.rho_initial, inst.Q, ps, inst.U)
        prev = None
        for eps in (1e-12, 1e-9, 1e-6, 1e-3, 1e-1, 0.5):
            rep = check_raio_conditions(broken, Tolerances(certainty_eps=min(eps, 0.999)))
            if prev is not None:
                assert rep.cond_ii_ok >= prev.cond_ii_ok
                assert rep.cond_iii_ok >= prev.cond_iii_ok
                assert rep.cond_i_ok <= prev.cond_i_ok
            prev = rep

    def test_mismatched_signature(self, rng):
        with pytest.raises(DimensionError):
            RaioInstance(random_density([2, 3], rng), random_projector([6], rng),
                         random_projector([2, 3], rng), random_unitary([2, 3], rng))

    def test_wrong_kind(self, rng):
        with pytest.raises(DimensionError):
            RaioInstance(random_density([4], rng), random_projector([4], rng),
                         random_projector([4], rng), random_projector([4], rng))


class TestEquality:
    def test_trivial_evolution(self, rng):
        rho = random_density([4], rng)
        q = random_projector([4], rng, rank=2)
        rep = check_raio_equality(RaioInstance(rho, q, q, identity([4]).with_kind("unitary")))
        assert rep.equality_residual < 1e-14

    def test_twin_verified(self):
        rep = check_raio_equality(build_twin_instance(SQRT_HALF, SQRT_HALF, 8, 3, seed=4))
        assert rep.verdict == VERIFIED
        assert rep.equality_residual < 1e-9

    @pytest.mark.parametrize("d_ii", [4, 8, 16])
    def test_twin_many_seeds(self, d_ii):
        for seed in range(20):
            rng = rng_from_seed(seed)
            a = rng.uniform(0.05, 0.95)
            phase = np.exp(2j * np.pi * rng.uniform())
            inst = build_twin_instance(math.sqrt(a) * phase, math.sqrt(1 - a), d_ii,
                                       int(rng.integers(1, d_ii)), seed=seed)
            rep = check_raio_equality(inst)
            assert rep.verdict == VERIFIED, (seed, rep)

    def test_random_instances_not_verified(self):
        verdicts = [check_raio_equality(random_instance((2, 4), s)).verdict for s in range(30)]
        assert VERIFIED not in verdicts
        assert set(verdicts) == {CONDITIONS_VIOLATED}

    def test_residual_reported_when_conditions_fail(self):
        rep = check_raio_equality(random_instance((2, 4), 0))
        assert rep.equality_residual > 1e-3

    def test_equality_violated_possible_in_principle(self):
        # conditions judged with a huge eps pass, equality still fails
        inst = random_instance((2, 2), 1)
        rep = check_raio_equality(inst, Tolerances(certainty_eps=0.999))
        assert rep.verdict in (EQUALITY_VIOLATED, CONDITIONS_VIOLATED)
        if rep.conditions_ok:
            assert rep.verdict == EQUALITY_VIOLATED

    @settings(max_examples=25, deadline=None)
    @given(seed=seeds)
    def test_basis_covariance(self, seed):
        inst = build_twin_instance(0.6, 0.8, 4, 2, seed=seed % 1000)
        w = random_unitary([2, 4], rng_from_seed(seed))
        a, b = check_raio_equality(inst), check_raio_equality(inst.conjugated(w))
        assert a.verdict == b.verdict == VERIFIED
        assert abs(a.p_Q - b.p_Q) < 1e-9

    def test_report_record_round_trip(self):
        rep = check_raio_equality(build_twin_instance(0.6, 0.8, 4, 2))
        again = RaioReport.from_record(rep.to_record())
        assert again == rep


class TestTwinBuilder:
    def test_probability(self):
        assert check_raio_conditions(build_twin_instance(SQRT_HALF, SQRT_HALF, 4, 2)).p_Q == pytest.approx(0.5)

    def test_amplitude_law(self):
        inst = build_twin_instance(0.6, 0.8j, 8, 5, seed=9)
        assert check_raio_conditions(inst).p_Q == pytest.approx(0.36, abs=1e-12)

    @pytest.mark.parametrize("alpha,beta", [(1.0, 0.0), (0.0, 1.0)])
    def test_certain_trigger_rejected(self, alpha, beta):
        with pytest.raises(ValueError):
            build_twin_instance(alpha, beta, 4, 2)

    def test_bad_norm(self):
        with pytest.raises(ValueError):
            build_twin_instance(0.5, 0.5, 4, 2)

    @pytest.mark.parametrize("size", [0, 4])
    def test_bad_region(self, size):
        with pytest.raises(ValueError):
            build_twin_instance(0.6, 0.8, 4, size)

    def test_seed_reproducible(self):
        a = build_twin_instance(0.6, 0.8, 4, 2, seed=17)
        b = build_twin_instance(0.6, 0.8, 4, 2, seed=17)
        assert np.array_equal(a.U.matrix, b.U.matrix)
        assert np.array_equal(a.rho_initial.matrix, b.rho_initial.matrix)


class TestTwoRoutes:
    def test_identity_evolution(self, rng):
        rho = random_density([2, 3], rng)
        q = random_projector([3], rng)
        res = evolve_prepared_two_routes(rho, q, identity([2]).with_kind("unitary"),
                                         identity([3]).with_kind("unitary"))
        assert res.residual < 1e-12
        assert operator_distance(res.route_b, prepared_state(rho, q)).trace_norm < 1e-12

    def test_prepared_state_oracle(self, rng):
        rho = random_density([2, 3], rng)
        q = random_projector([3], rng)
        qf = naive_kron(np.eye(2), q.matrix)
        num = naive_partial_trace(qf @ rho.matrix @ qf, 2, 3, 0)
        assert_allclose(prepared_state(rho, q).matrix, num / np.trace(num).real, atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(seed=seeds, d=st.sampled_from([3, 8]))
    def test_random(self, seed, d):
        rng = rng_from_seed(seed)
        res = evolve_prepared_two_routes(random_density([2, d], rng), random_projector([d], rng),
                                         random_unitary([2], rng), random_unitary([d], rng))
        assert res.residual < 1e-10

    def test_non_factorized_breaks_it(self):
        # an entangling U breaks the factorized picture
        rng = rng_from_seed(2)
        rho = random_density([2, 2], rng)
        q = random_projector([2], rng, rank=1)
        u = random_unitary([2, 2], rng)
        collapsed = luders_collapse(rho, q, subsystem=1).state
        route_a = partial_trace(conjugate(collapsed, u), [0])
        assert trace_distance(route_a, prepared_state(rho, q)) > 1e-3

    def test_preparation_instance_verified(self):
        inst = build_twin_instance(0.6, 0.8, 4, 2, seed=1)
        rng = rng_from_seed(1)
        q_ii = Operator(inst.Q.matrix.reshape(2, 4, 2, 4)[0, :, 0, :], [4], "projector")
        inst2 = instance_from_preparation(inst.rho_initial, q_ii, random_unitary([2], rng),
                                          random_unitary([4], rng))
        assert check_raio_equality(inst2).verdict == VERIFIED

    def test_impossible_trigger(self):
        rho = Operator(np.diag([1.0, 0, 0, 0]), [2, 2], "density")
        with pytest.raises(ImpossibleEventError):
            prepared_state(rho, Operator(np.diag([0.0, 1.0]), None, "projector"))
