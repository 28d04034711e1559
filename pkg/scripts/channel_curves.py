"""MMSE curves, de Bruijn entropy reconstructions and limit probes.

    python scripts/channel_curves.py
"""
import math

from wepi_lab import distributions as D
from wepi_lab.channel import (ONE, lemma_limit_probe, mmse, representation_check,
                              sde_via_debruijn, theorem3_derivative_check)
from wepi_lab.entropy import wde
from wepi_lab.weights import builtin_weight, rho_from_spec

SIGNALS = ("normal:mu=0,sigma=2", "uniform:a=0,b=1", "exp:lambda=1", "gamma:beta=2,lambda=1")


def main():
    print("M(Z; gamma)")
    for s in SIGNALS:
        z = D.make_dist(s)
        print(f"  {s:24s}", " ".join(f"{mmse(z, g).value:.6f}" for g in (0, 0.1, 1, 10, 100)))

    print("\nentropy from the MMSE curve vs direct")
    for s in SIGNALS:
        z = D.make_dist(s)
        r = sde_via_debruijn(z, tol=1e-4)
        h = wde(z, builtin_weight("one")).h.value
        print(f"  {s:24s} {r.h.value:.7f}  direct {h:.7f}  tail power {r.decay_power:.2f}  {r.h.status}")

    print("\nderivative identity, rho = 1, N(0,1)")
    for g in (0.5, 1.0, 4.0):
        r = theorem3_derivative_check(ONE, D.Normal(0, 1), g)
        print(f"  gamma={g:<4} fd={r.fd:.8f} rhs={r.rhs.value:.8f} printed={r.rhs_printed.value:.8f} "
              f"order={r.order:.2f}")

    tanh = rho_from_spec("two_plus_tanh_y")
    for rho, s in ((ONE, "normal:mu=0,sigma=1"), (tanh, "uniform:a=0,b=1")):
        z = D.make_dist(s)
        for mode in ("gamma_to_0", "gamma_to_inf"):
            p = lemma_limit_probe(rho, z, mode)
            print(f"\n{mode} {rho.source} {s}: target {p.target.value:.6f}")
            for g, v, gap in zip(p.gammas, p.values, p.gaps):
                print(f"  gamma={g:<7g} value={v.value:.6f} gap={gap:.3e}")

    r = representation_check(ONE, D.Normal(0, 1))
    print(f"\nrepresentation, N(0,1): value {r.value:.6f} target {r.target.value:.6f} "
          f"integral residual {r.integral_residual:.2e}; 1/2 ln(2 pi e) = {0.5 * math.log(2 * math.pi * math.e):.6f}")


if __name__ == "__main__":
    main()
