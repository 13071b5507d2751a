"""Train a few zoo members on the compositional task and compare them.

Each model sees only the two basis sinusoids of each series during
training, then forecasts the composed series zero-shot. Desk-scale step
budgets keep this demo to a couple of minutes.
"""
import numpy as np

from specbench import ForecastTask, gen_sinusoid_dataset, mae, make_windows, compositional_basis
from specbench.harness.runner import _train_val_windows
from specbench.models import (
    Family,
    ModelConfig,
    TrainConfig,
    count_params,
    estimate_flops,
    fit,
    predict,
)

task = ForecastTask(context_len=256, horizon=192)
dataset = gen_sinusoid_dataset(n_series=3, seed=1)
T = 1008

train, val, tests = [], [], []
for series in dataset.composed:
    for basis in compositional_basis(series, 2):
        tr, va = _train_val_windows(basis, task, T, stride=1)
        train += tr
        val += va
    tests.append(make_windows(series, task, 1, (T - task.context_len, len(series)))[0])
print(f"{len(train)} basis train windows, {len(tests)} composed test windows")

zoo = {
    "naive-last": (Family.NAIVE_LAST, {}, {}),
    "seasonal-naive": (Family.SEASONAL_NAIVE, {}, {}),
    "ses": (Family.SES, {}, {}),
    "ar-ls": (Family.AR_LS, {}, {}),
    "nlinear": (Family.NLINEAR, {}, dict(max_steps=400)),
    "mlp": (Family.MLP, {}, dict(max_steps=600)),
    "nbeats-lite": (Family.NBEATS_LITE, dict(nbeats_hidden=128), dict(max_steps=600)),
}

print(f"{'model':15s} {'OOD MAE':>9s} {'params':>9s} {'fwd MACs':>10s}")
for name, (family, axes, train_axes) in zoo.items():
    cfg = ModelConfig(family=family, horizon=task.horizon, context_len=task.context_len, **axes)
    tc = TrainConfig(windows_batch=64, val_check_every=100, seed=1, **train_axes)
    model = fit(cfg, train, val, tc)
    score = float(np.mean([mae(w.target, predict(model, w.context)) for w in tests]))
    print(f"{name:15s} {score:9.3f} {count_params(model):9d} {estimate_flops(cfg):10d}")
