"""Print how close to 1 the survival probability must be for pi-v at each (epsilon, n)."""

from graphdp.mechanisms import pi_v_min_p

for n in (50, 200, 1000, 4039):
    for eps in (1, 9, 20, 100):
        r = pi_v_min_p(eps, n)
        print(f"n={n:<5} eps={eps:<4} 1 - p_min = {r.subtrahend:.4e}  binding={r.binding}")
