"""
Error rate versus trigger delay
===============================

Sweep the phase generator's trigger delay across a full pulse period and
print the sifted error rate at each point, an ASCII version of the alignment
scan used to verify the randomizer timing in hardware.
"""

from plugplay_qkd import SessionConfig, delay_scan, export_csv

# 60k bits per point is enough to separate the three regimes by eye.
config = SessionConfig(n_bits=60_000, seed=2024)
delays = [float(d) for d in range(-200, 201, 10)]

result = delay_scan(config, delays, max_workers=4)

print("delay_ns   qber     sifted   bar")
for delay, est in zip(result.delays_ns, result.estimates):
    bar = "#" * round(est.qber * 80)
    print(f"{delay:7.0f}   {est.qber:.4f}  {est.n_sifted:6d}   {bar}")

export_csv(result, "qber_vs_delay_demo.csv")
print("\nwrote qber_vs_delay_demo.csv")

# Reading the curve: near zero delay all four modulation passes of a bit see
# the same pattern step, the randomization phase cancels out of the
# interference and the error rate sits at the dark-count floor. Near half a
# period the leading and trailing pulse straddle different steps and the key
# is fully scrambled (50%). In between sit partial-overlap waists whose
# height depends on how the session's polarization splits across H and V.
