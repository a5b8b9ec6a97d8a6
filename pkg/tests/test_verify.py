"""Verify module: FD oracle soundness, residual checks, report output."""
import json
import math

import pytest

from grtsurf.expr import parse_expr
from grtsurf.surface import SurfaceSpec, rotation_spec
from grtsurf.verify import (ALL_CHECKS, StencilError, convergence_order,
                            fd_fundamental_forms, laplacian_mu_fd, run_checks)


def spec_for(f, g, l, n=16, **kw):
    kw.setdefault("u1_range", (-1.0, 1.0))
    kw.setdefault("u2_range", (-1.0, 1.0))
    return SurfaceSpec.from_strings(f, g, l, nu1=n, nu2=n, **kw)


# ---------------------------------------------------------------------------
# FD oracle
# ---------------------------------------------------------------------------

def test_fd_forms_frozen_example():
    spec = spec_for("z", "z", "t^2+t+1")
    fd = fd_fundamental_forms(spec, 0j, step=1e-4)
    for got, want in zip((fd.E, fd.F, fd.G, fd.e, fd.f, fd.g),
                         (9.0, 0.0, 4.0, 6.0, 0.0, 4.0)):
        assert abs(got - want) <= 1e-4 * (1 + abs(want))
    assert abs(fd.psi_fd - 1.0) <= 1e-12


def test_fd_oracle_sphere_soundness():
    # ell constant 1: unit sphere for any f; E = G, F = 0, K = 1, H = -1
    spec = spec_for("z^2", "z", "1")
    for z in (0.2 + 0.1j, -0.4 + 0.3j, 0.5 - 0.5j):
        fd = fd_fundamental_forms(spec, z, step=1e-4)
        assert abs(fd.E - fd.G) <= 1e-5 * (1 + abs(fd.E))
        assert abs(fd.F) <= 1e-5 * (1 + abs(fd.E))
        assert abs(fd.K_fd - 1.0) <= 1e-5
        assert abs(fd.H_fd + 1.0) <= 1e-5


def test_fd_residual_shrinks_quadratically():
    # halving the step shrinks the truncation error by about 4x
    spec = spec_for("z", "z", "t^2+t+1")
    z = 0.31 + 0.22j
    from grtsurf import geometry, surface
    frame = geometry.point_frame(*surface.jets_at(spec, z))

    def resid(step):
        fd = fd_fundamental_forms(spec, z, step=step)
        return abs(fd.E - frame.forms.E)

    r1, r2 = resid(2e-4), resid(1e-4)
    assert 3.0 <= r1 / r2 <= 5.0


def test_fd_stencil_out_of_window():
    spec = spec_for("z", "z", "t^2+t+1")
    with pytest.raises(StencilError):
        fd_fundamental_forms(spec, complex(-1.0, 0.5), step=1e-4)


def test_fd_stencil_hits_singular_point():
    spec = spec_for("z", "z^2", "t^2+t+1")
    with pytest.raises(StencilError):
        fd_fundamental_forms(spec, complex(1e-4, 0.0), step=1e-4)


def test_laplacian_mu_fd_vanishes():
    spec = spec_for("exp(z)", "z", "t")
    assert abs(laplacian_mu_fd(spec, 0.3 + 0.4j)) <= 1e-6


# ---------------------------------------------------------------------------
# run_checks
# ---------------------------------------------------------------------------

def test_primary_run_passes_all_defaults():
    report = run_checks(spec_for("z", "z", "t^2+t+1", n=24))
    assert report.passed
    names = [c.name for c in report.checks]
    assert names == [c for c in ALL_CHECKS if c != "rotation_match"]
    for check in report.checks:
        assert check.count > 0
        assert check.status == "ok"
        assert check.worst_point is not None
        lo1, hi1 = (-1.0, 1.0)
        assert lo1 <= check.worst_point[0] <= hi1
        assert lo1 <= check.worst_point[1] <= hi1


def test_tr_profile_reduces_relation():
    # ell = exp(t): C = 1 and H/K = -lam/(2 psi) - psi/2
    from grtsurf import geometry, surface
    spec = spec_for("z", "z", "exp(t)", n=24)
    report = run_checks(spec, checks=("weingarten_relation",))
    assert report.check("weingarten_relation").max_rel <= 1e-9
    for z in (0.3 + 0.4j, -0.6 - 0.2j, 0.9 + 0.9j):
        frame = geometry.point_frame(*surface.jets_at(spec, z))
        assert frame.c == 1.0
        reduced = -frame.lam / (2 * frame.psi) - frame.psi / 2
        assert abs(frame.h_over_k - reduced) <= 1e-9 * (1 + abs(frame.h_over_k))


def test_appell_profile():
    # ell = t: C = 0 branch, H + psi K = 0
    from grtsurf import geometry, surface
    spec = spec_for("z", "z", "t", n=24)
    report = run_checks(spec, checks=("weingarten_relation", "pde_lapla1"))
    assert report.passed
    for z in (0.3 + 0.4j, -0.6 - 0.2j, 0.7 - 0.8j):
        frame = geometry.point_frame(*surface.jets_at(spec, z))
        assert frame.c == 0.0
        if frame.regular:
            resid = abs(frame.mean + frame.psi * frame.gauss)
            assert resid <= 1e-9 * (1 + abs(frame.psi * frame.gauss))


def test_insufficient_coverage_status():
    # constant profile: ell' = 0 everywhere, C-based checks cannot run
    report = run_checks(spec_for("z", "z", "1", n=8))
    wein = report.check("weingarten_relation")
    pde = report.check("pde_lapla1")
    assert wein.status == "insufficient_coverage"
    assert pde.status == "insufficient_coverage"
    assert wein.count == 0 and wein.excluded == 64
    assert not report.passed
    # the identities that do not involve C still hold
    assert report.check("support_identity").status == "ok"
    assert report.check("quadratic_distance").status == "ok"


def test_exclusions_counted_on_degenerate_diagonals():
    # mu = u1^2 - u2^2 vanishes exactly on the grid diagonals for ell = t^2+1
    spec = spec_for("z^2", "exp(z)", "t^2+1", n=16)
    report = run_checks(spec, checks=("weingarten_relation", "pde_lapla1"))
    wein = report.check("weingarten_relation")
    assert wein.excluded >= 16  # at least the main diagonal
    assert wein.excluded == report.check("pde_lapla1").excluded
    assert report.passed


def test_psi_small_points_excluded():
    # ell = sinh(t) vanishes at mu = 0; put a grid line exactly on mu = 0
    spec = spec_for("z", "z", "sinh(t)", n=9)
    report = run_checks(spec, checks=("weingarten_relation",))
    assert report.check("weingarten_relation").excluded >= 9
    assert report.passed


def test_rotation_match_check():
    # nu1 = 8 keeps u1 = 0 off the grid; det V vanishes exactly there for
    # ell = cos and the whole row would be excluded as irregular
    ell = parse_expr("cos(t)", "t", real=True)
    spec = rotation_spec(1.0, 0.0, ell, u1_range=(-1, 1),
                         u2_range=(-math.pi, math.pi), nu1=8, nu2=9)
    report = run_checks(spec, checks=("rotation_match",), rotation=(1.0, 0.0))
    check = report.check("rotation_match")
    assert check.count == 72
    assert check.excluded == 0
    assert check.max_rel <= 1e-9


def test_unknown_check_rejected():
    with pytest.raises(ValueError):
        run_checks(spec_for("z", "z", "t"), checks=("bogus",))


def test_tolerance_override_fails_report():
    report = run_checks(spec_for("z", "z", "t^2+t+1", n=8),
                        checks=("support_identity",),
                        tolerances={"support_identity": 1e-18})
    assert not report.passed
    assert report.check("support_identity").status == "fail"


# ---------------------------------------------------------------------------
# Convergence order
# ---------------------------------------------------------------------------

def test_convergence_order_second_order():
    spec = spec_for("z", "z", "t^2+t+1", n=32)
    order, residuals = convergence_order(spec)
    assert 1.8 <= order <= 2.2
    assert residuals[0] > residuals[-1]


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------

def test_report_json_schema():
    report = run_checks(spec_for("z", "z", "t^2+t+1", n=8))
    data = json.loads(report.to_json())
    assert set(data) == {"spec", "checks", "pass"}
    assert data["pass"] is True
    assert data["spec"]["f"] == "z"
    assert data["spec"]["ell"] == "t^2+t+1"
    for check in data["checks"]:
        for key in ("name", "count", "excluded", "max_abs", "max_rel",
                    "mean_rel", "worst_point", "pass"):
            assert key in check
        assert isinstance(check["pass"], bool)
        assert isinstance(check["count"], int)
        u1, u2 = check["worst_point"]
        assert -1 <= u1 <= 1 and -1 <= u2 <= 1


def test_report_deterministic():
    a = run_checks(spec_for("z", "z", "cos(t)", n=8)).to_json()
    b = run_checks(spec_for("z", "z", "cos(t)", n=8)).to_json()
    assert a == b
