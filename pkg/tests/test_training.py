import numpy as np
import pytest

from specbench.errors import DivergedLoss, UnsupportedFamily
from specbench.models import (
    Attention,
    Family,
    Head,
    LossKind,
    ModelConfig,
    ModelSize,
    PosEncoding,
    Scaler,
    Tokenization,
    TrainConfig,
    embed,
    fit,
    predict,
    predict_quantiles,
)
from specbench.models.networks import build_network
from specbench.models.losses import mae_loss, mse_loss, huber_loss, student_t_nll
from specbench.optim import rng_stream
from specbench.series import WindowPair

from helpers import fd_gradcheck, kink_margin, kink_safe_targets


def _sine_windows(count, l, h, seed=0, freq=16.0, noise=0.0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        t0 = rng.integers(0, 1000)
        t = np.arange(t0, t0 + l + h)
        seq = 3.0 * np.sin(2 * np.pi * t / freq) + 1.5
        if noise:
            seq = seq + rng.normal(size=seq.size) * noise
        out.append(WindowPair(seq[:l], seq[l:], int(t0 + l)))
    return out


def _tiny_cfg(family, **kwargs):
    defaults = dict(
        family=family,
        horizon=4,
        context_len=16,
        patch_len=8,
        patch_stride=4,
        size=ModelSize.TINY,
        mlp_hidden=12,
        mlp_depth=2,
        nbeats_hidden=10,
        nbeats_blocks=2,
        nbeats_depth=1,
        nhits_pool_rates=(4, 1),
    )
    defaults.update(kwargs)
    return ModelConfig(**defaults)


def _tiny_transformer(**kwargs):
    return _tiny_cfg(Family.PATCH_TRANSFORMER, custom_dims=(12, 24, 1, 2), **kwargs)


def _loss_graph(kind):
    return {
        LossKind.MAE: mae_loss,
        LossKind.MSE: mse_loss,
        LossKind.HUBER: huber_loss,
    }[kind]


def _gradcheck_family(cfg, seed=3):
    net = build_network(cfg, rng_stream(seed, "gradcheck"))
    rng = np.random.default_rng(seed)

    def make_loss_fn(ctx, tgt):
        def loss_fn():
            pred = net.forward(ctx)
            if cfg.loss is LossKind.STUDENT_T:
                mu, sigma, nu = pred
                return student_t_nll(tgt, mu, sigma, nu)
            return _loss_graph(cfg.loss)(tgt, pred)

        return loss_fn

    loss_fn = None
    for _ in range(25):  # kink-free evaluation point for the FD oracle
        ctx = rng.normal(size=(3, cfg.context_len))
        if cfg.loss in (LossKind.MAE, LossKind.HUBER):
            tgt = kink_safe_targets(net.forward(ctx).data, rng)
        else:
            tgt = rng.normal(size=(3, cfg.horizon)) * 2.0 + 0.3
        loss_fn = make_loss_fn(ctx, tgt)
        if kink_margin(loss_fn) > 1e-3:
            break

    return fd_gradcheck(loss_fn, net.params, rng=np.random.default_rng(seed + 1))


@pytest.mark.parametrize(
    "family",
    [Family.NLINEAR, Family.DLINEAR, Family.MLP, Family.NBEATS_LITE, Family.NHITS_LITE],
)
def test_gradcheck_simple_families(family):
    assert _gradcheck_family(_tiny_cfg(family)) < 1e-4


@pytest.mark.parametrize("loss", list(LossKind))
def test_gradcheck_transformer_losses(loss):
    cfg = _tiny_transformer(loss=loss)
    assert _gradcheck_family(cfg) < 1e-4


@pytest.mark.parametrize(
    "axes",
    [
        dict(tokenization=Tokenization.NONE, patch_len=1, patch_stride=1),
        dict(tokenization=Tokenization.BINNING, patch_len=1, patch_stride=1),
        dict(tokenization=Tokenization.LAGS, patch_len=1, patch_stride=1),
        dict(attention=Attention.CAUSAL),
        dict(head=Head.RESIDUAL),
        dict(pos_encoding=PosEncoding.SINCOS),
        dict(pos_encoding=PosEncoding.RELATIVE),
        dict(pos_encoding=PosEncoding.ROPE),
        dict(decomposition=__import__("specbench.models", fromlist=["Decomposition"]).Decomposition.MOVING_AVG),
        dict(scaler=Scaler.ROBUST),
    ],
)
def test_gradcheck_transformer_axes(axes):
    cfg = _tiny_transformer(**axes)
    assert _gradcheck_family(cfg) < 1e-4


def test_fit_determinism_bit_identical():
    train = _sine_windows(24, 16, 4, seed=1)
    valid = _sine_windows(4, 16, 4, seed=2)
    cfg = _tiny_cfg(Family.MLP)
    tc = TrainConfig(max_steps=30, val_check_every=10, windows_batch=8, seed=5)
    a = fit(cfg, train, valid, tc)
    b = fit(cfg, train, valid, tc)
    assert a.params.keys() == b.params.keys()
    for name in a.params:
        np.testing.assert_array_equal(a.params[name], b.params[name])
    assert a.history == b.history


def test_fit_seed_changes_parameters():
    train = _sine_windows(24, 16, 4, seed=1)
    valid = _sine_windows(4, 16, 4, seed=2)
    cfg = _tiny_cfg(Family.MLP)
    a = fit(cfg, train, valid, TrainConfig(max_steps=20, val_check_every=10, windows_batch=8, seed=1))
    b = fit(cfg, train, valid, TrainConfig(max_steps=20, val_check_every=10, windows_batch=8, seed=2))
    assert any(not np.array_equal(a.params[n], b.params[n]) for n in a.params)


def test_early_stopping_restores_best_validation():
    train = _sine_windows(30, 16, 4, seed=3, noise=0.3)
    valid = _sine_windows(6, 16, 4, seed=4, noise=0.3)
    cfg = _tiny_cfg(Family.MLP)
    tc = TrainConfig(max_steps=400, val_check_every=10, patience=3, windows_batch=8, seed=7, lr=5e-3)
    model = fit(cfg, train, valid, tc)
    assert model.history, "validation history must be recorded"
    best_recorded = min(v for _, _, v in model.history)
    # recompute validation loss at the returned parameters
    from specbench.models.training import _batch_loss, _window_matrices

    net = model.network()
    val_loss = _batch_loss(net, cfg, *_window_matrices(valid)).data.item()
    assert val_loss == pytest.approx(best_recorded, abs=1e-12)
    assert model.history == sorted(model.history, key=lambda rec: rec[0])


def test_mlp_converges_on_noiseless_basis_sinusoid():
    # threshold 0.05 x amplitude, from the pilot run; 500 steps suffice
    amp, n = 7.0, 1200
    from specbench.series import ForecastTask, TimeSeries, make_windows

    basis = TimeSeries(id="b", values=amp * np.sin(2 * np.pi * 9 * np.arange(n) / n))
    task = ForecastTask(256, 192)
    train = make_windows(basis, task, 1, (0, 816))
    val = make_windows(basis, task, 1, (816 - 192 - 256, 1008))
    cfg = ModelConfig(family=Family.MLP, horizon=192, context_len=256)
    tc = TrainConfig(max_steps=500, val_check_every=100, windows_batch=64, seed=1)
    model = fit(cfg, train, val, tc)
    train_mae = float(
        np.mean([np.abs(w.target - predict(model, w.context)).mean() for w in train[::25]])
    )
    assert train_mae < 0.05 * amp


def test_fit_rejects_mismatched_window_shapes():
    good = _sine_windows(6, 16, 4, seed=20)
    bad = _sine_windows(2, 12, 4, seed=21)
    cfg = _tiny_cfg(Family.MLP)
    with pytest.raises(ValueError):
        fit(cfg, bad, [], TrainConfig(max_steps=2))
    with pytest.raises(ValueError):
        fit(cfg, good, bad, TrainConfig(max_steps=2))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_diverged_loss_raises():
    train = _sine_windows(12, 16, 4, seed=5)
    valid = _sine_windows(2, 16, 4, seed=6)
    cfg = _tiny_cfg(Family.MLP, loss=LossKind.MSE)
    # Adam bounds the update magnitude by lr, so overflowing float64 needs
    # an absurd rate; the second step's forward pass is non-finite
    tc = TrainConfig(max_steps=200, val_check_every=50, windows_batch=8, seed=1, lr=1e200)
    with pytest.raises(DivergedLoss):
        fit(cfg, train, valid, tc)


@pytest.mark.parametrize(
    "family,axes",
    [
        (Family.NLINEAR, {}),
        (Family.DLINEAR, {}),
        (Family.PATCH_TRANSFORMER, dict(head=Head.LINEAR)),
    ],
)
def test_scaling_equivariance(family, axes):
    train = _sine_windows(20, 16, 4, seed=8)
    valid = _sine_windows(3, 16, 4, seed=9)
    if family is Family.PATCH_TRANSFORMER:
        axes = dict(axes, custom_dims=(12, 24, 1, 2))
    cfg = _tiny_cfg(family, scaler=Scaler.REVIN_STANDARD, **axes)
    model = fit(cfg, train, valid, TrainConfig(max_steps=15, val_check_every=5, windows_batch=8, seed=1))
    ctx = train[0].context
    base = predict(model, ctx)
    a, b = 2.5, -1.75
    shifted = predict(model, a * ctx + b)
    np.testing.assert_allclose(shifted, a * base + b, atol=1e-6)


def test_causal_attention_ignores_future_tokens():
    cfg = _tiny_transformer(attention=Attention.CAUSAL, pos_encoding=PosEncoding.SINCOS)
    net = build_network(cfg, rng_stream(2, "causal"))
    rng = np.random.default_rng(10)
    ctx = rng.normal(size=(1, 16))
    baseline = net.encode(ctx).data[0]
    # perturb only the final patch (tokens beyond the first)
    perturbed = ctx.copy()
    perturbed[0, -4:] += 5.0
    changed = net.encode(perturbed).data[0]
    np.testing.assert_allclose(changed[0], baseline[0], atol=1e-9)


def test_embed_shape_and_determinism():
    train = _sine_windows(12, 16, 4, seed=11)
    cfg = _tiny_transformer()
    model = fit(cfg, train, train[:2], TrainConfig(max_steps=5, val_check_every=5, windows_batch=4, seed=1))
    e1 = embed(model, train[0].context)
    e2 = embed(model, train[0].context)
    assert e1.shape == (3, 12)  # (16-8)/4+1 tokens, tiny hidden
    np.testing.assert_array_equal(e1, e2)
    with pytest.raises(UnsupportedFamily):
        embed(fit(_tiny_cfg(Family.NLINEAR), train, train[:2], TrainConfig(max_steps=5)), train[0].context)


def test_student_t_quantiles_ordered():
    train = _sine_windows(16, 16, 4, seed=12, noise=0.2)
    cfg = _tiny_transformer(loss=LossKind.STUDENT_T)
    model = fit(cfg, train, train[:2], TrainConfig(max_steps=10, val_check_every=5, windows_batch=4, seed=1))
    qs = predict_quantiles(model, train[0].context, qs=(0.1, 0.5, 0.9))
    assert np.all(qs[0.1] <= qs[0.5]) and np.all(qs[0.5] <= qs[0.9])
    point = predict(model, train[0].context)
    np.testing.assert_allclose(qs[0.5], point, atol=1e-9)


def test_identical_params_identical_embeddings():
    train = _sine_windows(12, 16, 4, seed=13)
    cfg = _tiny_transformer()
    tc = TrainConfig(max_steps=5, val_check_every=5, windows_batch=4, seed=3)
    m1 = fit(cfg, train, train[:2], tc)
    m2 = fit(cfg, train, train[:2], tc)
    np.testing.assert_array_equal(embed(m1, train[0].context), embed(m2, train[0].context))
