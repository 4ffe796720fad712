from __future__ import annotations

import io
import math

import numpy as np
import pytest

from longrun import processes, term
from longrun.ensemble import ensemble_map, ensemble_norm
from longrun.errors import DomainError, PreconditionError, ValidationError
from longrun.sdf import DisasterParams, disaster_entropy, disaster_short_rate, sim_disaster_sdf

FIG2 = DisasterParams.figure2()


def lognormal_ensemble(sigma, n, n_paths, seed):
    paths = ensemble_map(lambda i, s: processes.sim_unit_mean_lognormal(sigma, n, s), n_paths, seed)
    m = np.vstack([p.fs.realized for p in paths])
    return m, np.log(np.vstack([p.fs.predicted for p in paths]))


class TestCurve:
    def test_flat_yields(self):
        rep = term.yields(term.DiscountCurve.flat(0.02, range(3), 10))
        assert all(v == pytest.approx(0.02, abs=1e-15) for v in rep.yields.values())
        assert rep.y_inf[0] == pytest.approx(0.02, abs=1e-15)
        assert rep.z_long[1] == pytest.approx(math.exp(0.02) - 1.0, rel=1e-13)
        assert rep.rho[2] == pytest.approx(-0.02, abs=1e-15)
        assert rep.convergence[0] < 1e-15

    def test_short_rate(self):
        curve = term.DiscountCurve({(0, 1): 0.99, (0, 2): 0.98, (0, 3): 0.97, (0, 4): 0.96})
        assert term.yields(curve).yields[(0, 1)] == pytest.approx(0.01005034, abs=1e-8)

    def test_disaster_curve_long_yield(self):
        r = disaster_short_rate(FIG2)
        rep = term.yields(term.DiscountCurve.flat(r, range(5), 120))
        assert all(abs(v - r) <= 1e-12 for v in rep.y_inf.values())

    def test_insufficient_maturity(self):
        with pytest.raises(PreconditionError):
            term.yields(term.DiscountCurve.flat(0.02, range(2), 3))

    def test_flags(self):
        curve = term.DiscountCurve({(0, 1): 1.01, (0, 2): 0.98, (0, 3): 0.99})
        assert any("above 1" in f for f in curve.flags)
        assert any("increase" in f for f in curve.flags)
        assert term.DiscountCurve.flat(0.01, range(2), 5).flags == ()

    def test_bad_entries(self):
        with pytest.raises(ValidationError):
            term.DiscountCurve({(1, 1): 0.9})
        with pytest.raises(DomainError):
            term.DiscountCurve({(0, 1): 0.0})

    def test_csv_round_trip(self):
        curve = term.DiscountCurve.flat(0.013, range(3), 6)
        back = term.read_discount_curve(io.StringIO(curve.to_csv()))
        assert back.grid == curve.grid

    def test_duplicate_row(self):
        with pytest.raises(ValidationError, match="duplicate"):
            term.read_discount_curve(io.StringIO("t,s,price\n0,1,0.99\n0,1,0.98\n"))


class TestShortRate:
    def test_constant(self):
        assert np.allclose(term.long_term_short_rate(np.full(10, 0.02)).values, 0.02, rtol=1e-15)

    def test_alternating(self):
        r = np.tile([0.0, 0.02], 50_000)
        v = term.long_term_short_rate(r).values
        assert v[-1] == pytest.approx(0.01, abs=1e-12)
        assert abs(v[-2] - 0.01) < 1e-6

    def test_sdf_avg_vs_bonds_zero(self):
        d = np.full(10, 0.998)
        assert np.all(term.sdf_avg_vs_bonds(d, d).values == 0.0)

    def test_sdf_avg_vs_bonds_decay(self):
        bond = math.exp(-disaster_short_rate(FIG2))

        def one(i, seed):
            m = sim_disaster_sdf(FIG2, 10_000, seed).fs.realized
            return term.sdf_avg_vs_bonds(m, np.full(m.size, bond)).values

        norm = ensemble_norm(np.vstack(ensemble_map(one, 300, 3)), 2.0)
        assert norm[99] / norm[-1] >= 5.0

    def test_sdf_avg_vs_bonds_divergent(self):
        def one(i, seed):
            y = processes.sim_divergent(1024, seed).fs.realized
            return term.sdf_avg_vs_bonds(1.0 + y, np.ones(y.size)).values

        norm = ensemble_norm(np.vstack(ensemble_map(one, 300, 4)), 2.0)
        assert norm[-1] > norm[99]


HORIZONS = (1, 2, 4, 8, 16, 32, 64)


@pytest.fixture(scope="module")
def iid():
    m, lp = lognormal_ensemble(0.2, 64, 1000, 5)
    return m, lp, term.bcz_entropy(m, HORIZONS, dates=(0,), log_predicted=lp)


class TestBcz:
    def test_iid_horizon_independent(self, iid):
        _, _, bm = iid
        for n in HORIZONS:
            assert abs(bm.i_t_n[(0, n)] - 0.02) <= 3 * bm.i_t_n_se[(0, n)]
            assert bm.i_t_n[(0, n)] >= -1e-10

    def test_identity_residual(self, iid):
        _, _, bm = iid
        res = term.bcz_identity_check(bm, 0.02, 0.0)[0]
        assert not res.flagged

    def test_injected_mismatch(self, iid):
        _, _, bm = iid
        a = term.bcz_identity_check(bm, 0.02, 0.0)[0].residual
        b = term.bcz_identity_check(bm, 0.03, 0.0)[0].residual
        assert a - b == pytest.approx(0.01, abs=1e-15)

    def test_callable_and_array_bonds_agree(self):
        m, lp = lognormal_ensemble(0.2, 16, 1000, 6)
        hs = (1, 4, 8, 16)
        a = term.bcz_entropy(m, hs, log_predicted=lp)
        b = term.bcz_entropy(m, hs, log_bond=lambda p, t, n: 0.0)
        arr = np.zeros((m.shape[0], 1, 16))
        c = term.bcz_entropy(m, hs, log_bond=arr)
        for n in hs:
            assert a.i_t_n[(0, n)] == pytest.approx(b.i_t_n[(0, n)], rel=1e-12)
            assert b.i_t_n[(0, n)] == c.i_t_n[(0, n)]

    def test_constant_rate_model(self):
        paths = ensemble_map(lambda i, s: sim_disaster_sdf(FIG2, 48, s), 2000, 7)
        m = np.vstack([p.fs.realized for p in paths])
        lp = np.log(np.vstack([p.fs.predicted for p in paths]))
        bm = term.bcz_entropy(m, (1, 2, 4, 8, 16, 32), dates=(0, 8, 16), log_predicted=lp)
        z = disaster_entropy(FIG2)
        r = disaster_short_rate(FIG2)
        # three dates share one ensemble, so flag at 3 combined standard errors
        for t, res in term.bcz_identity_check(bm, z, r, k=3.0).items():
            assert bm.y_t_inf[t] == pytest.approx(r, rel=1e-12)
            assert not res.flagged, t
        assert term.i_inf_monotonicity(bm) == []

    def test_too_few_paths(self):
        m, lp = lognormal_ensemble(0.2, 8, 10, 8)
        with pytest.raises(PreconditionError):
            term.bcz_entropy(m, (1, 2, 4), log_predicted=lp)

    def test_horizon_too_long(self):
        m, lp = lognormal_ensemble(0.2, 8, 1000, 9)
        with pytest.raises(ValidationError):
            term.bcz_entropy(m, (1, 2, 16), log_predicted=lp)

    def test_needs_inner_expectation(self):
        m, _ = lognormal_ensemble(0.2, 8, 1000, 9)
        with pytest.raises(PreconditionError):
            term.bcz_entropy(m, (1, 2, 4))


class TestAj:
    def test_flat_curve_collapse(self):
        r, n = 0.004, 200
        m = processes.sim_lognormal_martingale(-r - 0.02, 0.2, n, 10).fs.realized
        aj = term.aj_decompose(m, term.DiscountCurve.flat(r, range(n + 1), 12), 12, z_est=0.02)
        for k, hr in aj.holding_returns.items():
            assert np.allclose(hr, math.exp(r), rtol=1e-14), k
        assert aj.delta_est == pytest.approx(r, abs=1e-14)
        assert aj.rf_inf == pytest.approx(r, abs=1e-14)
        assert abs(aj.z_perm - 0.02) <= 1e-10
        assert np.allclose(aj.perm, m * math.exp(r), rtol=1e-14)
        assert np.all(np.abs(aj.perm * aj.temp - m) <= 2 * np.spacing(m))

    def test_holding_return(self):
        curve = term.DiscountCurve({(0, 1): 0.99, (0, 2): 0.97, (1, 2): 0.985, (1, 3): 0.96})
        assert term.holding_return(curve, 1, 2) == pytest.approx(0.985 / 0.97, rel=1e-15)

    def test_disaster_growth(self):
        n = 100_000
        r, z = disaster_short_rate(FIG2), disaster_entropy(FIG2)
        m = sim_disaster_sdf(FIG2, n, 11).fs.realized
        aj = term.aj_decompose(m, term.DiscountCurve.flat(r, range(n + 1), 2), 2, z_est=z)
        assert abs(aj.perm_growth - math.exp(-z)) < 0.01
        assert aj.growth_target == pytest.approx(math.exp(-z), rel=1e-12)

    def test_curve_too_short(self):
        with pytest.raises(PreconditionError):
            term.aj_decompose(np.ones(5), term.DiscountCurve.flat(0.01, range(6), 4), 8)


class TestDir:
    def test_nondecreasing(self):
        assert term.dir_monotonicity([0.01, 0.01, 0.02, 0.03]) == []

    def test_dip(self):
        assert term.dir_monotonicity([0.01, 0.02, 0.015, 0.03, 0.03]) == [3]

    def test_flat_model_curve(self):
        rep = term.yields(term.DiscountCurve.flat(disaster_short_rate(FIG2), range(20), 60))
        assert term.dir_monotonicity([rep.y_inf[t] for t in sorted(rep.y_inf)]) == []
