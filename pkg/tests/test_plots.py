import numpy as np

from relaycode.exit import ExitCurve
from relaycode.plots import (
    render_exit_plot,
    render_fer_plot,
    render_limits_plot,
    render_threshold_plot,
)
from relaycode.simulate import FerRecord


def _record(gamma, fer):
    return FerRecord(gamma_sd_db=gamma, frames=1000, frame_errors=int(fer * 1000),
                     bit_errors=10, fer=fer, ber=1e-3, mean_iterations=5.0,
                     stop_reason="frame_errors", config_hash="x", seed=1)


def test_render_fer_plot(tmp_path):
    curves = {
        "strategy B": [_record(0.0, 0.5), _record(1.0, 0.1), _record(2.0, 0.01)],
        "baseline": [_record(0.0, 0.9), _record(1.0, 0.8), _record(2.0, 0.6)],
    }
    path = render_fer_plot(curves, tmp_path / "fer.png")
    assert path.exists() and path.stat().st_size > 0


def test_render_exit_plot(tmp_path):
    grid = np.linspace(0, 0.98, 20)
    inner = ExitCurve(i_a=grid, i_e=0.3 + 0.7 * grid, component="inner",
                      gamma_sd_db=0.77, gamma_rd_db=5.17)
    outer = ExitCurve(i_a=grid, i_e=grid ** 1.5, component="outer")
    path = render_exit_plot([inner], outer, tmp_path / "exit.png")
    assert path.exists() and path.stat().st_size > 0


def test_render_limits_plot(tmp_path):
    rows = [
        {"q": 2, "threshold_db": -1.1, "threshold_per_user_db": -1.1},
        {"q": 8, "threshold_db": 0.86, "threshold_per_user_db": -2.4},
    ]
    path = render_limits_plot(rows, tmp_path / "limits.png")
    assert path.exists() and path.stat().st_size > 0


def test_render_threshold_plot(tmp_path):
    rows = [
        {"strategy": "A", "q": 2, "threshold_db": 0.47},
        {"strategy": "A", "q": 4, "threshold_db": 1.37},
        {"strategy": "B", "q": 2, "threshold_db": 0.77},
        {"strategy": "B", "q": 4, "threshold_db": 1.57},
    ]
    path = render_threshold_plot(rows, tmp_path / "th.png")
    assert path.exists() and path.stat().st_size > 0
