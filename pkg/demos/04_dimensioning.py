#!/usr/bin/env python3
"""Dimensioning: how much traffic fits under a delay budget?

For each new-flow share we invert the delay curve over a widening budget and
watch the admissible throughput saturate at the stability limit: past a knee,
relaxing the delay bound buys no extra traffic, the bottleneck station caps
it.  With q_nf = 1 that cap is the controller; with q_nf = 0.2 the controller
still binds, but eight times higher.
"""

from sdnqueue import (
    max_throughput,
    rate_from_us,
    stability_supremum,
    zero_load_sojourn,
)

mu_switch = rate_from_us(9.8)
mu_ctrl = rate_from_us(240.0)

for q in (0.2, 0.5, 1.0):
    w0 = zero_load_sojourn(q, mu_switch, mu_ctrl)
    sup = stability_supremum(q, mu_switch, mu_ctrl)
    print(f"q_nf = {q}: zero-load sojourn {w0 * 1e6:7.2f} us, "
          f"stability limit {sup:9.1f} pkt/s")
    print("  bound [us]   admissible rate [pkt/s]   of limit")
    for factor in (1.2, 2.0, 5.0, 20.0, 100.0, 1000.0):
        bound = factor * w0
        res = max_throughput(bound, q_nf=q, mu_switch=mu_switch,
                             mu_controller=mu_ctrl)
        print(f"  {bound * 1e6:9.1f}   {res.rate:18.1f}       {res.rate / sup:7.1%}")
    print()

# an infeasible budget is flagged rather than raised
res = max_throughput(0.5 * zero_load_sojourn(1.0, mu_switch, mu_ctrl),
                     q_nf=1.0, mu_switch=mu_switch, mu_controller=mu_ctrl)
print(f"budget below the empty-system delay: rate {res.rate}, note {res.note!r}")
