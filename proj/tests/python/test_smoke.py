import numpy as np
import pytest

import netpgd


def test_rng_first_output():
    assert netpgd.rng_u64(0)[0] == 0x99EC5F36CB75F2B4


def test_decoder_shapes():
    spec = netpgd.DecoderSpec.mnist()
    assert spec.output_dim == 784
    assert spec.parameter_count == 385
    latent = netpgd.make_latent(spec, 0)
    w = netpgd.init_weights(spec, 1)
    x = netpgd.generate(spec, w, latent)
    assert x.shape == (784,)
    assert np.all((x > 0) & (x < 1))
    assert w.flatten().size == w.parameter_count


def test_operator_adjoint():
    op = netpgd.make_operator(30, 60, 2)
    rng = np.random.default_rng(0)
    x, r = rng.standard_normal(60), rng.standard_normal(30)
    assert abs(netpgd.apply(op, x) @ r - x @ netpgd.apply_adjoint(op, r)) < 1e-10
    np.testing.assert_allclose(netpgd.apply(op, x), op.matrix @ x, atol=1e-12)
    np.testing.assert_array_equal(netpgd.apply_magnitude(op, -x), netpgd.apply_magnitude(op, x))
    np.testing.assert_allclose(netpgd.apply_magnitude(op, x), np.abs(op.matrix @ x), atol=1e-12)


def test_net_pgd_cs_in_range():
    spec = netpgd.DecoderSpec.mnist()
    latent = netpgd.make_latent(spec, 0)
    xstar = netpgd.generate(spec, netpgd.init_weights(spec, 3), latent)
    op = netpgd.make_operator(196, 784, 1)
    cfg = netpgd.SolverConfig.cs_defaults()
    cfg.max_outer_iters = 20
    cfg.seed = 4
    tr = netpgd.net_pgd_cs(netpgd.apply(op, xstar), op, spec, latent, cfg, reference=xstar)
    recs = tr.records
    assert recs[-1]["measurement_loss"] < recs[0]["measurement_loss"]
    assert netpgd.nmse(tr.image, xstar) < netpgd.nmse(tr.initial_image, xstar)


def test_cpr_and_net_gd_run():
    spec = netpgd.DecoderSpec.mnist()
    latent = netpgd.make_latent(spec, 0)
    xstar = netpgd.generate(spec, netpgd.init_weights(spec, 5), latent)
    op = netpgd.make_operator(392, 784, 2)
    y = netpgd.apply_magnitude(op, xstar)
    cfg = netpgd.SolverConfig.cpr_defaults()
    cfg.max_outer_iters = 5
    tr = netpgd.net_pgd_cpr(y, op, spec, latent, cfg, reference=xstar)
    assert np.isfinite(tr.records[-1]["phase_error"])
    gd = netpgd.net_gd(y, op, "magnitude", spec, latent, cfg)
    assert gd.image.shape == (784,)


def test_ista_and_rec():
    op = netpgd.make_operator(40, 64, 3)
    res = netpgd.ista_dct(np.zeros(40), op, 0.1, 20)
    assert not res.image.any()
    spec = netpgd.DecoderSpec([15, 15, 1], 14, False, False)
    latent = netpgd.make_latent(spec, 0)
    opt = netpgd.RecOptions()
    opt.trials = 5
    rep = netpgd.rec_check(784, spec, latent, opt, 0, orthonormal=True)
    assert rep.pass_rate == 1.0


def test_errors_raise():
    with pytest.raises(netpgd.NetpgdError):
        netpgd.DecoderSpec([15, 15, 1], 4)  # over-parameterized
    op = netpgd.make_operator(10, 20, 0)
    with pytest.raises(ValueError):
        netpgd.apply(op, np.zeros(19))
