import filecmp
import os

import numpy as np
import pytest

from conftest import unit_square
from levelset.benchmarks import (
    CaseConfig,
    convergence_rate,
    heaviside_area_mismatch,
    run_distortion,
    run_monotone1d,
    signed_distance_to_sphere,
    vortex2d_velocity,
    vortex3d_velocity,
)
from levelset.cli import build_parser, config_from_args, main
from levelset.fields import HeavisideParams, regularized_heaviside
from levelset.io import (
    emit_csv,
    emit_vtk,
    read_config,
    read_csv,
    read_vtk_points_and_scalars,
    write_manifest,
)
from levelset.redistance import RedistanceParams, project_function, redistance_field


# ----------------------------------------------------------------------
# analytic velocity fields


def test_vortex2d_pointwise_values():
    v = vortex2d_velocity(np.array([[0.5, 0.75]]), 0.0)
    assert v[0, 0] == -1.0
    assert abs(v[0, 1]) < 1e-15


def test_vortex2d_zero_at_reversal(rng):
    x = rng.uniform(0, 1, size=(50, 2))
    assert np.all(vortex2d_velocity(x, 4.0) == 0.0)


def test_vortex2d_reverses_sign(rng):
    x = rng.uniform(0, 1, size=(50, 2))
    assert np.array_equal(vortex2d_velocity(x, 8.0), -vortex2d_velocity(x, 0.0))


def test_vortex2d_vanishes_on_boundary(rng):
    edge = rng.uniform(0, 1, size=20)
    pts = np.concatenate([
        np.stack([np.zeros(20), edge], axis=-1),
        np.stack([np.ones(20), edge], axis=-1),
        np.stack([edge, np.zeros(20)], axis=-1),
        np.stack([edge, np.ones(20)], axis=-1),
    ])
    assert np.abs(vortex2d_velocity(pts, 1.3)).max() < 1e-15


def test_vortex3d_zero_at_half_period(rng):
    x = rng.uniform(0, 1, size=(40, 3))
    assert np.all(vortex3d_velocity(x, 1.5) == 0.0)


def test_vortex3d_vanishes_on_boundary(rng):
    base = rng.uniform(0, 1, size=(30, 3))
    for d in range(3):
        for val in (0.0, 1.0):
            pts = base.copy()
            pts[:, d] = val
            assert np.abs(vortex3d_velocity(pts, 0.7)).max() < 1e-14


def test_vortex3d_reverses_sign(rng):
    x = rng.uniform(0, 1, size=(20, 3))
    assert np.array_equal(vortex3d_velocity(x, 3.0), -vortex3d_velocity(x, 0.0))


def test_signed_distance_sphere():
    fn, grad = signed_distance_to_sphere((0.5, 0.75), 0.15)
    assert fn(np.array([0.5, 0.75])) == pytest.approx(0.15)
    assert fn(np.array([0.5, 0.9])) == pytest.approx(0.0, abs=1e-15)
    g = grad(np.array([[0.5, 1.0]]))
    assert np.allclose(g, [[0.0, -1.0]])


# ----------------------------------------------------------------------
# emitters


def test_emit_csv_empty_and_roundtrip(tmp_path):
    path = tmp_path / "empty.csv"
    emit_csv(path, ["a", "b"], [])
    assert path.read_text() == "a,b\n"
    path2 = tmp_path / "rows.csv"
    emit_csv(path2, ["x", "value"], [(0.1, 1.0 / 3.0), (0.2, 2.0)])
    header, rows = read_csv(path2)
    assert header == ["x", "value"]
    assert rows[0][1] == 1.0 / 3.0  # 17 significant digits round-trip exactly
    assert "0.33333333333333331" in path2.read_text()


def test_emit_vtk_roundtrip_1d_two_points(tmp_path):
    from levelset.mesh import build_structured

    patch = build_structured([(0.0, 1.0)], [1], 1)  # two grid nodes
    path = tmp_path / "line.vtk"
    emit_vtk(path, patch, {"phi": np.array([0.25, 0.75])})
    pts, scalars = read_vtk_points_and_scalars(path)
    assert len(pts) == 2
    assert np.allclose(pts[:, 0], [0.0, 1.0])
    assert np.allclose(scalars["phi"], [0.25, 0.75])


def test_emit_vtk_heaviside_in_unit_range(tmp_path):
    patch = unit_square(16)
    fn, _ = signed_distance_to_sphere((0.5, 0.75), 0.15)
    phi = project_function(patch, fn)
    sd = redistance_field(phi, RedistanceParams(kappa_d=0.0))
    hv = HeavisideParams(2.0)
    path = tmp_path / "snapshot.vtk"
    emit_vtk(path, patch, {
        "phi": lambda e, p: phi.eval_values(e, p),
        "heaviside": lambda e, p: regularized_heaviside(sd.eval_values(e, p), hv),
    })
    _, scalars = read_vtk_points_and_scalars(path)
    h = scalars["heaviside"]
    assert np.all((h >= 0.0) & (h <= 1.0))
    assert h.max() > 0.9 and h.min() < 0.1


def test_emit_vtk_unstructured_triangles(tmp_path):
    from levelset.mesh import triangulate

    tri = triangulate(unit_square(4))
    path = tmp_path / "tri.vtk"
    emit_vtk(path, tri, {"phi": np.arange(tri.n_dofs, dtype=float)})
    text = path.read_text()
    assert "UNSTRUCTURED_GRID" in text
    assert f"CELLS {tri.n_elements}" in text
    pts, scalars = read_vtk_points_and_scalars(path)
    assert len(pts) == tri.n_dofs
    assert np.allclose(scalars["phi"], np.arange(tri.n_dofs))


def test_write_manifest_sorted(tmp_path):
    path = tmp_path / "manifest.txt"
    write_manifest(path, {"zeta": 1, "alpha": 0.5, "flag": True})
    assert path.read_text() == "alpha=0.5\nflag=true\nzeta=1\n"


# ----------------------------------------------------------------------
# config handling


def test_read_config(tmp_path):
    path = tmp_path / "case.cfg"
    path.write_text("# a comment\ncase=vortex2d\nmesh=20\nalpha = 2.5\n\nalt=proj-scale\n")
    mapping = read_config(path)
    assert mapping == {"case": "vortex2d", "mesh": "20", "alpha": "2.5",
                       "alt": "proj-scale"}
    cfg = CaseConfig.from_mapping(mapping)
    assert cfg.case == "vortex2d"
    assert cfg.mesh_n == 20
    assert cfg.alpha == 2.5
    assert cfg.alternative == "proj-scale"


def test_config_unknown_key():
    with pytest.raises(ValueError):
        CaseConfig.from_mapping({"case": "vortex2d", "bogus": "1"})


def test_config_validation():
    with pytest.raises(ValueError):
        CaseConfig("nonsense")
    with pytest.raises(ValueError):
        CaseConfig("vortex2d", mesh_n=2)
    with pytest.raises(ValueError):
        CaseConfig("vortex2d", t_end=-1.0)


def test_config_resolved_defaults():
    cfg = CaseConfig("distortion").resolved()
    assert cfg.degree == 2 and cfg.alpha == 3.0 and cfg.kappa_d == 0.0
    cfg = CaseConfig("vortex2d", family="tri").resolved()
    assert cfg.degree == 1 and cfg.alpha == 2.0 and cfg.kappa_d == 10.0
    cfg = CaseConfig("monotone1d").resolved()
    assert cfg.kappa_d == 1.0 and cfg.alpha == 3.0


def test_cli_flag_overrides_config(tmp_path):
    cfg_file = tmp_path / "c.cfg"
    cfg_file.write_text("case=monotone1d\nmesh=12\nalpha=4.0\n")
    args = build_parser().parse_args(
        ["monotone1d", "--config", str(cfg_file), "--alpha", "2.5"])
    cfg = config_from_args(args)
    assert cfg.mesh_n == 12      # from config file
    assert cfg.alpha == 2.5      # flag wins


def test_cli_dt_cfl_mutually_exclusive():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["vortex2d", "--dt", "0.1", "--cfl", "0.5"])


# ----------------------------------------------------------------------
# runners


def test_convergence_rate_matches_printed_table():
    # recomputing the rate from the reported errors reproduces the reported
    # rate: log2(1.03e-1 / 5.37e-2) = 0.94 (the reported errors carry three
    # digits, so the recomputed rates match to about a percent)
    assert convergence_rate(1.03e-1, 5.37e-2) == pytest.approx(0.94, abs=5e-3)
    assert convergence_rate(6.19e-2, 1.89e-2) == pytest.approx(1.72, abs=1e-2)


def test_mismatch_norms_zero_for_identical_fields():
    patch = unit_square(6)
    fn, _ = signed_distance_to_sphere((0.5, 0.75), 0.15)
    phi = project_function(patch, fn)
    sd = redistance_field(phi, RedistanceParams(kappa_d=0.0))
    hv = HeavisideParams(2.0)
    assert heaviside_area_mismatch(patch, sd, sd, hv) == 0.0
    assert np.abs(phi.quadrature_values() - phi.quadrature_values()).max() == 0.0


def test_run_monotone1d_verdicts(tmp_path):
    cfg = CaseConfig("monotone1d", mesh_n=10, out_dir=str(tmp_path))
    report = run_monotone1d(cfg)
    assert report.curves["naive_uniform"].monotone
    assert not report.curves["naive_graded"].monotone
    assert report.curves["scaled_graded"].monotone
    assert (tmp_path / "monotone1d_curves.csv").exists()
    assert (tmp_path / "monotone1d_verdicts.csv").exists()
    assert (tmp_path / "manifest.txt").exists()


def test_run_distortion_small(tmp_path):
    cfg = CaseConfig("distortion", mesh_n=12, out_dir=str(tmp_path), vtk=False)
    report = run_distortion(cfg)
    by_key = {(e.alternative, e.kappa_d): e for e in report.entries}
    assert by_key[("direct", 0.0)].max_jump > 1e-3
    for alt in ("proj-redist", "proj-scale", "proj-inv-scale"):
        for kd in (0.0, 1.0):
            assert by_key[(alt, kd)].max_jump < 1e-8
    # the scaling alternatives pin the interface
    assert by_key[("proj-inv-scale", 10.0)].drift < 1e-10
    assert (tmp_path / "distortion_summary.csv").exists()


def test_run_outputs_deterministic(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    run_monotone1d(CaseConfig("monotone1d", mesh_n=10, out_dir=str(d1)))
    run_monotone1d(CaseConfig("monotone1d", mesh_n=10, out_dir=str(d2)))
    for name in ("monotone1d_curves.csv", "monotone1d_verdicts.csv"):
        assert filecmp.cmp(d1 / name, d2 / name, shallow=False)


def test_cli_end_to_end(tmp_path, capsys):
    out = tmp_path / "cli_run"
    code = main(["monotone1d", "--mesh", "10", "--out", str(out)])
    assert code == 0
    assert (out / "manifest.txt").exists()
    captured = capsys.readouterr()
    assert "monotone" in captured.out
    manifest = dict(line.split("=", 1) for line in
                    (out / "manifest.txt").read_text().splitlines())
    assert manifest["mesh_n"] == "10"
    assert manifest["case"] == "monotone1d"
