import numpy as np

from qforge import Profile, critical_redundancy, linear_grid, tradeoff_curve
from qforge.plotting import plot_curve, plot_profiles

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def test_curve_figure(tmp_path, two_cat):
    q, p = two_cat
    pts = tradeoff_curve(q, p, linear_grid(0, 0.9, 30))
    out = plot_curve(pts, tmp_path / "curve.png", rho_crit=critical_redundancy(q, p))
    assert out.read_bytes()[:8] == PNG_MAGIC


def test_curve_figure_without_critical_line(tmp_path, two_cat):
    q, p = two_cat
    pts = tradeoff_curve(q, p, [0.0, 0.1])
    assert plot_curve(pts, tmp_path / "c.png", rho_crit=1.0).exists()


def test_profile_bars_many_categories(tmp_path, rng):
    cats = [f"topic{i}" for i in range(12)]
    profiles = {name: Profile(cats, rng.dirichlet(np.ones(12))) for name in ("user", "population")}
    assert plot_profiles(profiles, tmp_path / "bars.png").read_bytes()[:8] == PNG_MAGIC
