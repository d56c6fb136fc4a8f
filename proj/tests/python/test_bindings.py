import json
import os
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from shred import (
    DataManager,
    ParametricDataManager,
    ParametricSHREDEngine,
    SHRED,
    SHREDEngine,
    ShredError,
    SINDy_Forecaster,
    double_gyre,
    read_dataset,
    traveling_wave,
)

ROOT = Path(__file__).resolve().parents[2]


def small_wave():
    return traveling_wave(rows=16, cols=16, timesteps=120, speed=0.5, wavelength=8.0)


def test_minimal_workflow_listing():
    X = traveling_wave(rows=8, cols=8, timesteps=60, speed=0.5, wavelength=8.0)

    manager = DataManager()
    manager.add_data(data=X, id="X", random=3, compress=False)
    train, val, test = manager.prepare()
    shred = SHRED()
    val_errors = shred.fit(train, val)
    engine = SHREDEngine(manager, shred)

    assert len(val_errors) == 200 or len(val_errors) == shred.best_epoch + 20
    assert len(train) + len(val) + len(test) == 60
    latents = engine.sensor_to_latent(manager.test_sensor_measurements)
    assert latents.shape == (6, 64)
    recon = engine.decode(latents)
    assert recon["X"].shape == (6, 8, 8)


def test_mobile_sensors_and_reconstruction():
    X = small_wave()
    T = X.shape[0]
    circle = np.array([8, 8]) + 4 * np.sin(np.array([np.arange(T) * 0.5, np.arange(T) * 0.5 + np.pi / 2])).T
    circle = circle.astype(int)
    mobile = [[(int(i), int(j)) for i, j in circle], [(3, 3)] * T, [(12, 5)] * T]

    manager = DataManager(lags=8, train_size=0.8, val_size=0.1, test_size=0.1)
    manager.add_data(data=X, id="X", mobile=mobile, compress=False)
    train_dataset, val_dataset, test_dataset = manager.prepare()
    shred = SHRED(sequence_model="LSTM", decoder_model="MLP", latent_forecaster="LSTM_Forecaster",
                  hidden_size=8, num_layers=1, decoder_layers=[32])
    val_errors = shred.fit(train_dataset=train_dataset, val_dataset=val_dataset, num_epochs=5, verbose=False)
    assert len(val_errors) == 5

    engine = SHREDEngine(manager, shred)
    z = engine.sensor_to_latent(manager.trajectory_measurements(0)[:100])
    forecast = engine.forecast_latent(h=7, init_latents=z)
    assert forecast.shape == (7, 8)
    metrics = engine.evaluate({"X": X}, split="test")
    assert metrics["X"]["snapshots"] == 12
    assert engine.reconstruct("val")["X"].shape == (12, 16, 16)


def test_parametric_listing_shapes():
    rng = np.random.default_rng(0)
    fields = [double_gyre(epsilon=e, omega=w, nx=10, ny=5, t_end=1.0) for e, w in rng.uniform(0.1, 0.3, (10, 2))]
    U = np.stack([u for u, _ in fields])
    V = np.stack([v for _, v in fields])
    parameters = rng.uniform(size=(10, U.shape[1], 2))

    manager_pod = ParametricDataManager(lags=5, train_size=0.8, val_size=0.1, test_size=0.1)
    manager_pod.add_data(data=U, id="U", random=3, compress=4)
    manager_pod.add_data(data=V, id="V", compress=4)
    assert manager_pod.target_width == 8
    manager_pod.add_data(data=parameters, id="mu", compress=False)
    assert manager_pod.target_width == 10

    noise = np.random.normal(loc=0, scale=0.005, size=manager_pod.sensor_measurements_df.shape)
    before = manager_pod.sensor_measurements_df.copy()
    manager_pod.sensor_measurements_df += noise
    assert np.allclose(manager_pod.sensor_measurements_df - before, noise)

    train_dataset, val_dataset, test_dataset = manager_pod.prepare()
    shred_pod = SHRED(sequence_model="LSTM", decoder_model="MLP", latent_forecaster=None,
                      hidden_size=4, num_layers=1, decoder_layers=[8])
    shred_pod.fit(train_dataset=train_dataset, val_dataset=val_dataset, num_epochs=2, patience=50)
    engine = ParametricSHREDEngine(manager_pod, shred_pod)
    rec = engine.reconstruct("test")
    assert rec["U"].shape[1:] == (21, 5, 10)
    with pytest.raises(ShredError, match="parametric"):
        engine.forecast_latent(h=3, init_latents=np.zeros((2, 4)))
    with pytest.raises(ShredError):
        SHREDEngine(manager_pod, shred_pod)


def test_sindy_forecaster():
    manager = DataManager(lags=8)
    manager.add_data(data=small_wave(), id="X", random=3, compress=False)
    train_dataset, val_dataset, _ = manager.prepare()
    latent_forecaster = SINDy_Forecaster(poly_order=1, include_sine=True, dt=1 / 5)
    shred = SHRED(sequence_model="GRU", decoder_model="MLP", latent_forecaster=latent_forecaster,
                  num_layers=1, decoder_layers=[16])
    val_errors = shred.fit(train_dataset=train_dataset, val_dataset=val_dataset, num_epochs=4,
                           sindy_thres_epoch=2, sindy_regularization=1)
    assert len(val_errors) == 4
    assert shred.latent_size == 3
    assert "dx0/dt" in shred.sindy_equations()
    xi = shred.sindy_coefficients
    assert np.all((xi == 0) | (np.abs(xi) >= 0.05))
    engine = SHREDEngine(manager, shred)
    seed = engine.sensor_to_latent(manager.trajectory_measurements(0)[:100])
    assert engine.forecast_latent(h=0, init_latents=seed).shape == (0, 3)
    assert engine.decode(engine.forecast_latent(h=5, init_latents=seed))["X"].shape == (5, 16, 16)


def test_core_errors_surface_as_exceptions():
    manager = DataManager(lags=4)
    with pytest.raises(ShredError, match="sensor"):
        manager.add_data(data=small_wave(), id="X", stationary=[(99, 0)])
    with pytest.raises(ShredError):
        SHRED(decoder_model="Transformer")
    with pytest.raises(ShredError, match="fitted"):
        _ = SHRED().latent_size


def find_cli():
    env = os.environ.get("SHRED_CLI")
    if env:
        return env
    for candidate in (ROOT / "build" / "shred", shutil.which("shred")):
        if candidate and Path(candidate).exists():
            return str(candidate)
    return None


@pytest.mark.skipif(find_cli() is None, reason="shred command-line tool not built")
def test_bindings_match_cli(tmp_path):
    config = {
        "seed": 9,
        "generate": {"kind": "traveling_wave", "rows": 16, "cols": 16, "timesteps": 120, "wavelength": 8.0},
        "manager": {"lags": 8},
        "fields": [{"path": "X.shdf", "id": "X", "sensors": 3}],
        "model": {"hidden_size": 6, "num_layers": 1, "decoder_layers": [24]},
        "training": {"epochs": 6, "batch_size": 16, "lr": 0.005},
    }
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps(config))
    cli = find_cli()
    subprocess.run([cli, "generate", "--config", str(cfg), "--out", str(tmp_path)], check=True, capture_output=True)
    subprocess.run([cli, "train", "--config", str(cfg), "--out", str(tmp_path)], check=True, capture_output=True)
    cli_val = json.loads((tmp_path / "train_report.jsonl").read_text().splitlines()[-1])["val_mse"]

    _, X = read_dataset(str(tmp_path / "X.shdf"))
    manager = DataManager(lags=8, seed=9)
    manager.add_data(data=X, id="X", random=3)
    train, val, _ = manager.prepare()
    shred = SHRED(hidden_size=6, num_layers=1, decoder_layers=[24], seed=9)
    shred.fit(train, val, num_epochs=6, batch_size=16, lr=0.005)
    assert abs(shred.val_mse - cli_val) <= 1e-12
