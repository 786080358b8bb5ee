"""Smoke test for the `emhd` extension module.

Imports an installed `emhd` if there is one (`maturin develop` in
crates/python); otherwise loads the library from the cargo target directory,
so `cargo build -p emhd-py && python3 python/smoke_test.py` also works.
"""

import importlib.machinery
import importlib.util
import math
import os
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_emhd():
    try:
        import emhd

        return emhd
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libemhd.so"
        if lib.exists():
            loader = importlib.machinery.ExtensionFileLoader("emhd", str(lib))
            spec = importlib.util.spec_from_loader("emhd", loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            sys.modules["emhd"] = module
            return module
    sys.exit("emhd not importable; run `cargo build -p emhd-py` first")


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    emhd = load_emhd()

    b = emhd.Field.abc(16)
    close(b.energy(), 0.5 * 3 * (2 * math.pi) ** 3, 1e-9)
    # Curl eigenfield: helicity equals twice the energy.
    close(b.helicity(), 2 * b.energy(), 1e-9)
    assert b.hall_term().max_abs_coeff() < 1e-12
    assert b.identity_residual() < 1e-12

    m = emhd.Field.single_mode(32, [4, 0, 0])
    close(m.besov_norm(1 / 3, 3, math.inf), 7.496, 1e-3)
    amps = m.shell_amplitudes()
    assert set(amps) == {"q", "lambda_q", "shell_l2", "shell_l3", "b_q", "beta_q"}
    assert amps["q"] == [-1, 0, 1, 2, 3, 4, 5]

    r = emhd.Field.random_shells(16, 1, 2, 7)
    close(r.energy(), 1.0, 1e-12)
    back = emhd.Field.from_physical(16, r.to_physical())
    assert (back - r).max_abs_coeff() < 1e-14
    assert r.curl().divergence().max_abs_coeff() < 1e-13
    total = r.shell(0) + r.shell(1) + r.shell(2) + r.shell(3) + r.shell(4)
    assert (total - r).max_abs_coeff() < 1e-14

    cfg = emhd.SolverConfig(16, 0.1, 1.0, 1e-3, 0.02, init="abc", snapshot_every=5)
    assert emhd.SolverConfig.parse(cfg.resolved_text()).resolved_text() == cfg.resolved_text()
    traj = emhd.evolve(cfg)
    assert len(traj) == 5
    h = traj.log()["H"]
    close(h[-1], h[0] * math.exp(-0.2 * traj.times[-1]), 1e-9 * h[0])
    assert traj.budget_csv().startswith("t,E,H,grad_l2,cum_dissipation,energy_ineq_residual\n")

    flux = emhd.flux_spectrum(traj.last())
    assert flux.startswith("Q,H_Q,Pi_Q,kernel_bound,beta_bound\n")

    small = emhd.SolverConfig(16, 0.05, 1.0, 2e-3, 0.02, init="random_shells", seed=3)
    t1 = emhd.evolve(small, potential=True)
    ident = emhd.helicity_identity(t1, "constant")
    assert max(abs(x) for x in ident["residual"]) < 1e-6
    t2 = emhd.evolve(small, t1.snapshots[0] + 1e-3 * emhd.Field.random_shells(16, 2, 2, 9))
    csv, fitted_c, ok = emhd.uniqueness_bound_check(t1, t2)
    assert csv.startswith("t,Z_l2_sq,besov_time_norm,fitted_C,bound_ok\n") and ok
    assert max(abs(x) for _, x in emhd.cross_energy_residual(t1, t2)) < 1e-6

    assert emhd.region_classify(3, 2, 1) == "uniqueness_region"
    try:
        emhd.region_classify(0.5, 2, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid exponent accepted")

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "b.bin")
        b.save(path, mu=0.1)
        assert (emhd.Field.load(path) - b).max_abs_coeff() == 0.0
        with open(path, "r+b") as f:
            f.write(b"XXXX")
        try:
            emhd.Field.load(path)
        except OSError as e:
            assert "bad snapshot header" in str(e)
        else:
            raise AssertionError("corrupt snapshot accepted")

    try:
        emhd.evolve(emhd.SolverConfig(16, 0.0, 1.0, 0.2, 1.0))
    except ValueError as e:
        assert "cfl_safety" in str(e)
    else:
        raise AssertionError("CFL violation accepted")

    print(f"emhd {emhd.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
