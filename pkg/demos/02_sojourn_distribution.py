#!/usr/bin/env python3
"""Beyond the mean: the full sojourn-time law of one node.

At a half-loaded controller with q_nf = 0.5 we tabulate the density and tail,
read off quantiles, and ask the dimensioning question behind deadline-bound
traffic: what fraction of packets clears 0.5 ms?
"""

import numpy as np

from sdnqueue import (
    ControllerParams,
    NodeParams,
    build_distribution,
    ccdf,
    pdf,
    prob_within_deadline,
    quantile,
    rate_from_us,
    solve_rates,
)

mu_c = rate_from_us(240.0)
node = NodeParams(lam=0.5 * mu_c / 0.5, mu_switch=rate_from_us(9.8), q_nf=0.5)
ctrl = ControllerParams(mu_c)
dist = build_distribution(node, ctrl, solve_rates(node, ctrl))

print(f"effective rates: switch {dist.a_switch:.1f}/s, controller {dist.a_controller:.1f}/s")
print(f"signed mixture coefficients: b1={dist.b1:+.4f}  b2={dist.b2:+.4f}  "
      f"d={dist.d:+.4f}  (sum {dist.b1 + dist.b2 + dist.d:.12f})")
print(f"mean sojourn {dist.mean() * 1e6:.2f} us")
print()

print("  t [us]      pdf [1/s]      P(W > t)")
for t_us in (0.0, 50.0, 100.0, 250.0, 500.0, 1000.0, 2000.0):
    t = t_us * 1e-6
    print(f"  {t_us:7.1f}   {float(pdf(dist, t)):12.2f}   {float(ccdf(dist, t)):.6f}")
print()

print("quantiles")
for p in (0.5, 0.9, 0.99, 0.999):
    print(f"  {p:5.3f} of packets clear {quantile(dist, p) * 1e6:9.2f} us")
print()

deadline = 0.5e-3
p_ok = prob_within_deadline(dist, deadline)
print(f"P(sojourn <= {deadline * 1e3:.1f} ms) = {p_ok:.4f}")

# sanity: the tail integrates to the mean
ts = np.linspace(0.0, 50.0 / min(dist.a_switch, dist.a_controller), 20001)
tail = ccdf(dist, ts)
area = float(np.sum(0.5 * (tail[1:] + tail[:-1]) * np.diff(ts)))
print(f"integral of the tail {area * 1e6:.2f} us (mean check)")
