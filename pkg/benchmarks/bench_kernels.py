#!/usr/bin/env python3
"""Benchmark the hot kernels: numba path vs pure-numpy fallback.

Run directly to time the currently selected backend, or with --compare to
spawn one subprocess per backend (the fallback is selected through the
RFI_QKD_NO_NUMBA environment flag) and print both.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np


def workloads():
    from rfi_qkd_lab.states import isotropic_bell_spectrum

    lam2 = isotropic_bell_spectrum(2, 0.01).ravel()
    lam3 = isotropic_bell_spectrum(3, 0.01).ravel()
    lam7 = isotropic_bell_spectrum(7, 0.01).ravel()
    rng = np.random.default_rng(0)
    big = rng.dirichlet(np.ones(49))
    return [
        ("entropy_bits(49)", "entropy", big, None, None),
        ("ball d=2 mu=0.02", "ball", lam2, 0.02, 2),
        ("ball d=3 mu=0.02", "ball", lam3, 0.02, 3),
        ("ball d=7 mu=0.02", "ball", lam7, 0.02, 7),
    ]


def run_backend() -> None:
    from rfi_qkd_lab import _kernels as K

    backend = "numba" if K.NUMBA_ENABLED else "numpy"
    # warm up (jit compile) outside the timed region
    K.entropy_bits(np.array([0.5, 0.5]))
    K.max_entropy_gap_ball(np.array([0.7, 0.1, 0.1, 0.1]), 0.01, 2, 2, 2000, 1e-13)
    print(f"backend: {backend}")
    for name, kind, lam, mu, d in workloads():
        reps = 2000 if kind == "entropy" else 300
        t0 = time.perf_counter()
        if kind == "entropy":
            for _ in range(reps):
                K.entropy_bits(lam)
        else:
            for _ in range(reps):
                K.max_entropy_gap_ball(lam.copy(), mu, d, d, 6000, 1e-14)
        dt = (time.perf_counter() - t0) / reps
        print(f"  {name:<20s} {dt*1e6:10.1f} us/call")


def compare() -> None:
    here = os.path.abspath(__file__)
    for label, env_extra in (("numba", {}), ("numpy fallback", {"RFI_QKD_NO_NUMBA": "1"})):
        env = dict(os.environ, **env_extra)
        print(f"--- {label} ---", flush=True)
        subprocess.run([sys.executable, here], env=env, check=True)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--compare", action="store_true", help="time both backends in subprocesses")
    args = parser.parse_args()
    if args.compare:
        compare()
    else:
        run_backend()


if __name__ == "__main__":
    main()
