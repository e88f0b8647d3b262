"""Does the predicted accomplishment curve mean what it claims?

Scatters synthetic targets from the initial density, replays the
mission against them, and compares the fraction found over time with
the predicted curve and its three-sigma sampling band.
"""

from pathlib import Path

import numpy as np

from uavsearch import load_scenario, monte_carlo_validate

scenario = Path(__file__).resolve().parents[1] / "scenarios" / "mission2.json"
config = load_scenario(scenario, overrides=["flights.0.duration_s=180"])
report = monte_carlo_validate(config, targets=800, seed=7)

print(f"{report.target_count} targets, seed {report.seed}")
detected = sum(1 for t in report.targets if t.detect_time is not None)
print(f"detected during the mission: {detected}")
print(f"curve stays inside the band: {report.within_band}\n")

print("  t   predicted  empirical   band")
for k in range(0, len(report.times), 30):
    print(f"{report.times[k]:5.0f}   {report.predicted[k]:.4f}     "
          f"{report.empirical[k]:.4f}   [{report.band_low[k]:.4f}, "
          f"{report.band_high[k]:.4f}]")

gap = np.abs(report.empirical - report.predicted)
print(f"\nlargest |empirical - predicted|: {gap.max():.4f}")
