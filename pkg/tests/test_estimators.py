import numpy as np
import pytest

from dcesim import kernels
from dcesim.estimators import (AlgorithmKind, NetworkState, NodeState,
                               RoundInputs, combine, dce_adapt, finalize_dce,
                               nlms_adapt, run_round, za_nlms_adapt)
from dcesim.recovery import OmpConfig
from dcesim.topology import Topology, metropolis_weights


def line_weights(n):
    adj = np.eye(n, dtype=bool)
    for k in range(n - 1):
        adj[k, k + 1] = adj[k + 1, k] = True
    return metropolis_weights(Topology(n_nodes=n, adjacency=adj)).weights


def fresh_net(kind, n, dim, weights, **kw):
    nodes = tuple(NodeState.initial(k, dim) for k in range(n))
    return NetworkState(kind=kind, nodes=nodes, weights=weights, **kw)


class TestNodeState:
    def test_mu0_stability_range(self):
        with pytest.raises(ValueError):
            NodeState.initial(0, 4, mu0=0.0)
        with pytest.raises(ValueError):
            NodeState.initial(0, 4, mu0=2.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            NodeState(node_id=0, omega=np.zeros(3), psi=np.zeros(4))


class TestNlmsAdapt:
    def test_hand_evaluated_update(self):
        state = NodeState(node_id=0, omega=np.zeros(2, dtype=complex),
                          psi=np.zeros(2, dtype=complex), mu0=0.45, eps=0.0)
        new = nlms_adapt(state, np.array([1.0, 0.0], dtype=complex), 2.0)
        assert np.allclose(new.psi, [0.9, 0.0], atol=1e-15)
        assert np.array_equal(new.omega, state.omega)

    def test_zero_error_keeps_estimate(self):
        rng = np.random.default_rng(0)
        omega = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        state = NodeState(node_id=0, omega=omega, psi=omega.copy(), eps=0.0)
        new = nlms_adapt(state, x, complex(np.vdot(omega, x)))
        assert np.abs(new.psi - omega).max() <= 1e-15

    def test_zero_input_keeps_estimate(self):
        rng = np.random.default_rng(1)
        omega = rng.standard_normal(4) + 0j
        state = NodeState(node_id=0, omega=omega, psi=omega.copy())
        new = nlms_adapt(state, np.zeros(4, dtype=complex), 1.0)
        assert np.array_equal(new.psi, omega)


class TestZaNlmsAdapt:
    def test_zero_rho_reduces_to_nlms(self):
        rng = np.random.default_rng(2)
        omega = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        x = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        state = NodeState(node_id=0, omega=omega, psi=omega.copy())
        a = nlms_adapt(state, x, 0.7 + 0.1j)
        b = za_nlms_adapt(state, x, 0.7 + 0.1j, 0.0)
        assert np.array_equal(a.psi, b.psi)

    def test_pure_shrinkage_step(self):
        omega = np.array([0.5, 0.0, 1.2], dtype=complex)
        x = np.array([1.0, 0.0, 0.0], dtype=complex)
        state = NodeState(node_id=0, omega=omega, psi=omega.copy(), eps=0.0)
        rho = 0.01
        new = za_nlms_adapt(state, x, complex(np.vdot(omega, x)), rho)
        expected = omega - rho * np.array([1.0, 0.0, 1.0])
        assert np.abs(new.psi - expected).max() <= 1e-15

    def test_matches_direct_formula_oracle(self):
        rng = np.random.default_rng(3)
        omega = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        x = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        d = complex(rng.standard_normal() + 1j * rng.standard_normal())
        rho, mu0, eps = 0.001, 0.45, 1e-8
        state = NodeState(node_id=0, omega=omega, psi=omega.copy(),
                          mu0=mu0, eps=eps)
        e = d - np.vdot(omega, x)
        mu = mu0 / (np.vdot(x, x).real + eps)
        csign = np.sign(omega.real) + 1j * np.sign(omega.imag)
        expected = omega + mu * np.conj(e) * x - rho * csign
        new = za_nlms_adapt(state, x, d, rho)
        assert np.abs(new.psi - expected).max() <= 1e-12

    def test_negative_rho_rejected(self):
        state = NodeState.initial(0, 3)
        with pytest.raises(ValueError):
            za_nlms_adapt(state, np.zeros(3), 0.0, -0.1)


class TestDceAdapt:
    def test_zero_error_keeps_estimate(self):
        rng = np.random.default_rng(4)
        omega = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        x_bar = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        state = NodeState(node_id=0, omega=omega, psi=omega.copy(), eps=0.0)
        new = dce_adapt(state, x_bar, complex(np.vdot(omega, x_bar)))
        assert np.abs(new.psi - omega).max() <= 1e-14

    def test_a_posteriori_identity(self):
        # with eps = 0: d - psi^H x = (1 - mu0)(d - omega^H x) exactly
        rng = np.random.default_rng(5)
        mu0 = 0.45
        omega = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        x_bar = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        d = complex(rng.standard_normal() + 1j * rng.standard_normal())
        state = NodeState(node_id=0, omega=omega, psi=omega.copy(),
                          mu0=mu0, eps=0.0)
        new = dce_adapt(state, x_bar, d)
        e_pre = d - np.vdot(omega, x_bar)
        e_post = d - np.vdot(new.psi, x_bar)
        assert abs(e_post - (1 - mu0) * e_pre) <= 1e-12

    def test_working_dimension(self):
        state = NodeState.initial(0, 10, mu0=0.45)
        new = dce_adapt(state, np.ones(10, dtype=complex), 1.0)
        assert new.psi.shape == (10,)


class TestCombine:
    def test_single_node_identity(self):
        psi = np.array([1.0 + 2j, 3.0])
        assert np.array_equal(combine([psi], np.array([1.0])), psi)

    def test_convexity_fixed_point(self):
        psi = np.array([1.0 - 1j, 2.0, 0.5j])
        out = combine([psi, psi.copy()], np.array([0.5, 0.5]))
        assert np.abs(out - psi).max() <= 1e-15

    def test_matches_weighted_sum_oracle(self):
        rng = np.random.default_rng(6)
        psis = [rng.standard_normal(4) + 1j * rng.standard_normal(4)
                for _ in range(3)]
        w = np.array([0.2, 0.3, 0.5])
        expected = sum(wi * p for wi, p in zip(w, psis))
        assert np.abs(combine(psis, w) - expected).max() <= 1e-12

    def test_rejects_non_stochastic_weights(self):
        with pytest.raises(ValueError):
            combine([np.zeros(2), np.zeros(2)], np.array([0.7, 0.7]))

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(ValueError):
            combine([np.zeros(2), np.zeros(3)], np.array([0.5, 0.5]))


def full_inputs(rng, n, m, omega_eff):
    x = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    d = np.array([np.vdot(omega_eff, x[k]) for k in range(n)]) \
        + 0.01 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return RoundInputs(x=x, d=d)


class TestRunRound:
    def test_single_node_reduces_to_adapt(self):
        rng = np.random.default_rng(7)
        net = fresh_net(AlgorithmKind.DIFFUSION_NLMS, 1, 4,
                        np.array([[1.0]]))
        inputs = full_inputs(rng, 1, 4, rng.standard_normal(4) + 0j)
        new, errors = run_round(net, inputs)
        ref = nlms_adapt(net.nodes[0], inputs.x[0], inputs.d[0])
        assert np.abs(new.nodes[0].psi - ref.psi).max() <= 1e-15
        assert np.abs(new.nodes[0].omega - ref.psi).max() <= 1e-15
        assert errors.shape == (1,)

    def test_symmetry_identical_nodes(self):
        # identical data and shared matrices keep node states identical
        rng = np.random.default_rng(8)
        n, m = 3, 5
        weights = metropolis_weights(
            Topology(n_nodes=n, adjacency=np.ones((n, n), dtype=bool))).weights
        net = fresh_net(AlgorithmKind.DIFFUSION_NLMS, n, m, weights)
        x_row = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        inputs = RoundInputs(x=np.tile(x_row, (n, 1)),
                             d=np.full(n, 1.0 - 0.5j))
        for _ in range(4):
            net, _ = run_round(net, inputs)
        for k in range(1, n):
            assert np.abs(net.nodes[k].omega - net.nodes[0].omega).max() <= 1e-14

    def test_two_rounds_match_scripted_walkthrough(self):
        # 3-node line graph, hand simulation with the public kernels
        rng = np.random.default_rng(9)
        n, m = 3, 4
        weights = line_weights(n)
        net = fresh_net(AlgorithmKind.DIFFUSION_NLMS, n, m, weights)
        omega_eff = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        rounds = [full_inputs(rng, n, m, omega_eff) for _ in range(2)]

        omegas = [np.zeros(m, dtype=complex) for _ in range(n)]
        for inputs in rounds:
            psis = []
            for k in range(n):
                st = NodeState(node_id=k, omega=omegas[k], psi=omegas[k])
                psis.append(nlms_adapt(st, inputs.x[k], inputs.d[k]).psi)
            omegas = [combine(psis, weights[k]) for k in range(n)]
            net, _ = run_round(net, inputs)
        for k in range(n):
            assert np.abs(net.nodes[k].omega - omegas[k]).max() <= 1e-12

    def test_requires_measurements_for_fixed_kinds(self):
        net = fresh_net(AlgorithmKind.DIFFUSION_NLMS, 2, 3, line_weights(2))
        with pytest.raises(ValueError):
            run_round(net, RoundInputs(x=np.zeros((2, 3), dtype=complex)))


class TestEngineEquivalence:
    """The public round composition and the fused run kernels must agree."""

    def setup_case(self, seed, n=4, m=6, d_dim=3, iters=25):
        rng = np.random.default_rng(seed)
        weights = line_weights(n)
        phis = np.stack([(rng.standard_normal((d_dim, m))
                          + 1j * rng.standard_normal((d_dim, m)))
                         * np.sqrt(0.5 / d_dim)] * n)
        omega0 = np.zeros(m, dtype=complex)
        omega0[[0, 2]] = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        xs_pad = np.zeros((n, iters + m - 1), dtype=complex)
        xs_pad[:, m - 1:] = (rng.standard_normal((n, iters))
                             + 1j * rng.standard_normal((n, iters))) / np.sqrt(2)
        noise = 0.03 * (rng.standard_normal((n, iters))
                        + 1j * rng.standard_normal((n, iters)))
        xbars = kernels.compress_series(xs_pad, phis, m)
        obar0 = np.stack([phis[k] @ omega0 for k in range(n)])
        d = kernels.measure_series_compressed(xbars, obar0, noise)
        return weights, phis, omega0, xs_pad, noise, xbars, d, iters, m

    def window(self, xs_pad, i, m):
        return xs_pad[:, i:i + m][:, ::-1]

    def test_full_dim_kernel_matches_rounds(self):
        (weights, _phis, omega0, xs_pad, noise, _xb, d, iters, m) = \
            self.setup_case(10)
        n = weights.shape[0]
        err2, omegas = kernels.run_full_dim(
            xs_pad, d, weights, 0.45, 1e-8, 0.001, m, False, 1, 1, 1.0)
        net = fresh_net(AlgorithmKind.SPARSE_DIFFUSION_NLMS, n, m, weights,
                        rho=0.001)
        for i in range(iters):
            net, errs = run_round(
                net, RoundInputs(x=self.window(xs_pad, i, m), d=d[:, i]))
            assert np.abs(np.abs(errs) ** 2 - err2[i]).max() <= 1e-10
        for k in range(n):
            assert np.abs(net.nodes[k].omega - omegas[k]).max() <= 1e-10

    def test_compressed_kernel_matches_rounds(self):
        (weights, phis, _omega0, xs_pad, _noise, xbars, d, iters, m) = \
            self.setup_case(11)
        n = weights.shape[0]
        err2, omegabs = kernels.run_compressed_fixed(
            xbars, d, weights, 0.45, 1e-8, False, 1, 1, 1.0)
        net = fresh_net(AlgorithmKind.DCE, n, phis.shape[1], weights,
                        phis=phis)
        for i in range(iters):
            net, errs = run_round(
                net, RoundInputs(x=self.window(xs_pad, i, m), d=d[:, i]))
            assert np.abs(np.abs(errs) ** 2 - err2[i]).max() <= 1e-10
        for k in range(n):
            assert np.abs(net.nodes[k].omega - omegabs[k]).max() <= 1e-10

    @pytest.mark.parametrize("shared", [True, False])
    def test_optimized_kernel_matches_rounds(self, shared):
        (weights, phis, omega0, xs_pad, noise, _xb, d, iters, m) = \
            self.setup_case(12)
        n = weights.shape[0]
        phis_k = phis.copy()
        err2, omegabs, diverged = kernels.run_compressed_opt(
            xs_pad, omega0, phis_k, noise, d, False, shared, weights,
            0.45, 1e-8, 0.08, 2, 1e-9, kernels.OMP_RANK_RTOL,
            kernels.PHI_DIVERGENCE_LIMIT, False, 1, 1, 1.0)
        assert not diverged
        net = fresh_net(AlgorithmKind.DCE_OPTIMIZED_PHI, n, phis.shape[1],
                        weights, phis=phis.copy(), eta=0.08,
                        shared_phi=shared, omp=OmpConfig(max_support=2))
        for i in range(iters):
            net, errs = run_round(
                net, RoundInputs(x=self.window(xs_pad, i, m),
                                 noise=noise[:, i], omega0=omega0))
            assert np.abs(np.abs(errs) ** 2 - err2[i]).max() <= 1e-9
        for k in range(n):
            assert np.abs(net.nodes[k].omega - omegabs[k]).max() <= 1e-9
            assert np.abs(net.phis[k] - phis_k[k]).max() <= 1e-9


class TestFinalize:
    def test_zero_estimates_decompress_to_zero(self):
        rng = np.random.default_rng(13)
        n, d_dim, m = 3, 4, 8
        phis = np.stack([(rng.standard_normal((d_dim, m))
                          + 1j * rng.standard_normal((d_dim, m)))] * n)
        net = fresh_net(AlgorithmKind.DCE, n, d_dim, line_weights(n),
                        phis=phis, omp=OmpConfig(max_support=2))
        outs = finalize_dce(net)
        assert all(np.count_nonzero(o) == 0 for o in outs)

    def test_noiseless_compressed_truth_recovers_support(self):
        rng = np.random.default_rng(14)
        n, d_dim, m, s = 2, 6, 12, 2
        phi = (rng.standard_normal((d_dim, m))
               + 1j * rng.standard_normal((d_dim, m))) * np.sqrt(0.5 / d_dim)
        omega0 = np.zeros(m, dtype=complex)
        support = [1, 7]
        omega0[support] = rng.standard_normal(s) + 1j * rng.standard_normal(s)
        obar = phi @ omega0
        nodes = tuple(
            NodeState(node_id=k, omega=obar.copy(), psi=obar.copy())
            for k in range(n))
        net = NetworkState(kind=AlgorithmKind.DCE, nodes=nodes,
                           weights=line_weights(n),
                           phis=np.stack([phi] * n),
                           omp=OmpConfig(max_support=s))
        outs = finalize_dce(net)
        for out in outs:
            if np.array_equal(np.sort(np.flatnonzero(out)), support):
                assert np.abs(out[support] - omega0[support]).max() <= 1e-6

    def test_node_order_permutation(self):
        rng = np.random.default_rng(15)
        n, d_dim, m = 3, 4, 8
        phis = np.stack([(rng.standard_normal((d_dim, m))
                          + 1j * rng.standard_normal((d_dim, m)))
                         for _ in range(n)])
        omegas = [rng.standard_normal(d_dim) + 1j * rng.standard_normal(d_dim)
                  for _ in range(n)]
        nodes = tuple(NodeState(node_id=k, omega=omegas[k], psi=omegas[k])
                      for k in range(n))
        net = NetworkState(kind=AlgorithmKind.DCE, nodes=nodes,
                           weights=line_weights(n), phis=phis,
                           omp=OmpConfig(max_support=2))
        outs = finalize_dce(net)
        perm = [2, 0, 1]
        net_p = NetworkState(kind=AlgorithmKind.DCE,
                             nodes=tuple(nodes[p] for p in perm),
                             weights=line_weights(n),
                             phis=phis[perm],
                             omp=OmpConfig(max_support=2))
        outs_p = finalize_dce(net_p)
        for i, p in enumerate(perm):
            assert np.array_equal(outs_p[i], outs[p])

    def test_rejects_full_dimension_kind(self):
        net = fresh_net(AlgorithmKind.DIFFUSION_NLMS, 2, 3, line_weights(2))
        with pytest.raises(ValueError):
            finalize_dce(net, OmpConfig(max_support=1))


def test_algorithm_kind_names():
    assert AlgorithmKind.from_name("DCE") is AlgorithmKind.DCE
    assert AlgorithmKind.DCE.compressed
    assert not AlgorithmKind.DIFFUSION_NLMS.compressed
    with pytest.raises(ValueError):
        AlgorithmKind.from_name("nope")
