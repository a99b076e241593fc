import pytest

from function.channel_model import GridMode, SystemConfig
from function.config import ConfigManager


def test_flat_file_uses_implied_section(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text("n_tx = 32\nn_rx = 8\ngrid_mode = on\nsnr_db = -10\n", encoding="utf-8")
    cfg = ConfigManager(path).read_config()
    assert (cfg.n_tx, cfg.n_rx, cfg.snr_db) == (32, 8, -10.0)
    assert cfg.grid_mode is GridMode.ON_GRID
    assert cfg.n_frames == SystemConfig().n_frames


def test_ini_round_trip(tmp_path):
    path = tmp_path / "out" / "estimate.ini"
    cfg = SystemConfig(n_tx=16, n_rx=8, l_tx=2, l_rx=2, n_streams=1, snr_db=-7.5,
                       grid_mode="on", gamp_damping=0.6, gamp_tol=1e-9, gamp_adaptive=False,
                       rng_seed=2 ** 63)
    manager = ConfigManager(path, must_exist=False)
    manager.save_config(cfg, {"trials": 10, "algorithms": ["onebit", "ls"]})

    reread = ConfigManager(path)
    assert reread.read_config() == cfg
    defaults = reread.read_sweep_defaults()
    assert defaults["trials"] == 10
    assert defaults["algorithms"] == ["onebit", "ls"]
    assert defaults["seed"] == 0


def test_missing_explicit_path(tmp_path):
    with pytest.raises(FileNotFoundError):
        ConfigManager(tmp_path / "absent.ini")


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[SystemConfig]\nn_tx = 16\nantennas = 4\n", encoding="utf-8")
    with pytest.raises(ValueError, match="antennas"):
        ConfigManager(path).read_config()


@pytest.mark.parametrize("text", [
    "n_tx = sixteen\n",
    "grid_mode = diagonal\n",
    "l_tx = 8\nn_tx = 4\n",
    "gamp_adaptive = maybe\n",
])
def test_invalid_values_rejected(tmp_path, text):
    path = tmp_path / "bad.cfg"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ValueError):
        ConfigManager(path).read_config()


@pytest.mark.parametrize("text, expected", [("yes", True), ("Off", False), ("1", True), ("false", False)])
def test_adaptive_switch_spellings(tmp_path, text, expected):
    path = tmp_path / "switch.cfg"
    path.write_text(f"gamp_adaptive = {text}\n", encoding="utf-8")
    assert ConfigManager(path).read_config().gamp_adaptive is expected


def test_sweep_defaults_without_section(tmp_path):
    path = tmp_path / "flat.cfg"
    path.write_text("n_frames = 32\n", encoding="utf-8")
    defaults = ConfigManager(path).read_sweep_defaults()
    assert defaults == {"trials": 200, "seed": 0, "workers": 1, "algorithms": ["onebit", "awgn", "ls"]}


def test_bad_sweep_section(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[SystemConfig]\n[Sweep]\ntrials = many\n", encoding="utf-8")
    with pytest.raises(ValueError):
        ConfigManager(path).read_sweep_defaults()
