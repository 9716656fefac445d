"""Smoke test for the pycqm extension module.

Build and install first, for example:
    pip install maturin && maturin develop --release -m crates/python/Cargo.toml
then run:
    python python/smoke_test.py
"""

import math

import pycqm


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    b = pycqm.Barrier(1.0, 8.0)
    print(b, "version", pycqm.__version__)

    # resonance where the half wavelength inside the barrier fits L
    close(b.t_quantum(math.sqrt(1.0 + (math.pi / 8.0) ** 2)), 1.0, 1e-12)
    close(b.t_quantum(1.0), 1.0 / 17.0, 1e-9)
    close(b.t_classical_avg(1e4, 1.0), 0.5, 1e-12)
    assert b.t_quantum(1.1, formula="linear") != b.t_quantum(1.1)

    curve = b.transmission_curve("icm", float("inf"), [0.5, 1.5])
    assert curve == [(0.5, 0.0), (1.5, 1.0)], curve
    assert pycqm.constrained_transmission(b, 0.01, 1.2) == 1.0
    assert pycqm.constrained_transmission(b, 0.01, 0.8) == 0.0

    period = pycqm.characteristic_period([1, 2, 3], [0.4, 1.0, 0.7])
    run = pycqm.evolve_rotor([1, 2, 3], [0.4, 1.0, 0.7], 20 * period, n_samples=50)
    e0 = run["energy"][0]
    assert max(abs(e - e0) for e in run["energy"]) < 1e-9 * e0

    geo = pycqm.orbit_geometry([1, 2, 3])
    assert geo["orbit_dim"] == 6 and geo["kernel"] == ["I11", "I22", "I33"], geo
    assert pycqm.orbit_dim("so3", [0, 0, 1]) == 2
    assert set(pycqm.fixture_names()) == {"so3", "r6", "rma", "spin1"}
    sigma = pycqm.poisson_matrix("so3", [0, 0, 2])
    assert sigma[0][1] == -sigma[1][0] != 0

    try:
        pycqm.Barrier(-1.0, 8.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative barrier accepted")

    res = pycqm.scatter_packet(b, 100.0, 2.0, points_per_wavelength=20)
    close(res["transmission"], b.t_quantum_avg(100.0, 2.0), 0.02)
    print("packet transmission", round(res["transmission"], 4))
    print("smoke test passed")


if __name__ == "__main__":
    main()
