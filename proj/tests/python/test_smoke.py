import math

import numpy as np
import pytest

import sbcrb


def test_large_system_value():
    v = sbcrb.det_crb_asymptotic(sbcrb.AsymptoticRatios(0.5, 0.5, 0.5), sbcrb.PowerConfig(1, 1, 1))
    assert v == pytest.approx(0.7807764064044151, rel=1e-12)


def test_fixed_point_matches_closed_form():
    r = sbcrb.AsymptoticRatios(0.5, 0.5, 0.5)
    sol = sbcrb.fixed_point_m0(np.full(4, 1.0), r, 1.0)
    assert sol.value == pytest.approx(sbcrb.m0_closed_identity(1.0, 1.0, r), abs=1e-10)


def test_exact_bounds_against_oracles():
    G = sbcrb.gen_channel_iid(6, 2, 7)
    Sp = sbcrb.make_orthogonal_pilots(2, 4, 1.0)
    rng = np.random.default_rng(3)
    Sd = (rng.choice([-1, 1], (2, 6)) + 1j * rng.choice([-1, 1], (2, 6))) / math.sqrt(2)
    assert sbcrb.det_crb_avg(Sp, Sd, 6, 0.2) == pytest.approx(sbcrb.det_crb_avg_oracle(Sp, Sd, G, 0.2), rel=1e-9)

    d, p = sbcrb.SystemDims(6, 2, 4, 10), sbcrb.PowerConfig(1, 1, 0.2)
    closed = sbcrb.stoch_crb_avg(sbcrb.gram_spectrum(G), d, p)
    assert closed == pytest.approx(sbcrb.stoch_crb_avg_fim_oracle(G, d, p), rel=1e-8)


def test_pilot_budget_and_design():
    p = sbcrb.PowerConfig(1, 1, 0.1)
    lt = sbcrb.required_pilots(0.1, 512, 32, 1024, p, sbcrb.PilotScheme.training).value
    ls = sbcrb.required_pilots(0.1, 512, 32, 1024, p, sbcrb.PilotScheme.semiblind_det).value
    assert lt == 512 and ls <= lt

    mse = sbcrb.det_crb_asymptotic(sbcrb.AsymptoticRatios(0.5, 0.5, 0.4), p)
    assert sbcrb.solve_beta_for_mse(mse, p, 0.5, 0.5).value == pytest.approx(0.4, abs=1e-8)


def test_errors_map_to_exceptions():
    with pytest.raises(sbcrb.DimensionError):
        sbcrb.derive_ratios(sbcrb.SystemDims(64, 32, 16, 128))
    with pytest.raises(sbcrb.Infeasible):
        sbcrb.required_pilots(1e-9, 64, 16, 256, sbcrb.PowerConfig(1, 1, 1), sbcrb.PilotScheme.training)
    assert sbcrb.ncae([1.0, 3.0], 2.0) == pytest.approx(0.2)
