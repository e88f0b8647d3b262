"""Run a shortened mission from a scenario file and inspect the result.

Loads the packaged mission-2 scenario, shrinks the flight to two
minutes with an override, runs it, and prints the accomplishment
curve. The same thing is available from the command line:

    uavsearch simulate scenarios/mission2.json --set flights.0.duration_s=120
"""

from pathlib import Path

from uavsearch import load_scenario, run_mission

scenario = Path(__file__).resolve().parents[1] / "scenarios" / "mission2.json"
config = load_scenario(scenario, overrides=["flights.0.duration_s=120"])
report = run_mission(config)

print(f"mission {report.mission_id}: {len(report.logs)} flight(s), "
      f"{report.times[-1]:.0f} s simulated")
print(f"final accomplishment: {report.final_eta:.4f}")
print(f"violations: {report.violations}, boundary clamps: {report.clamp_events}")

print("\n  t     accomplishment")
for k in range(0, len(report.times), 20):
    print(f"{report.times[k]:5.0f}   {report.eta[k]:.4f}")

log = report.logs[0].as_arrays()
print(f"\nflight envelope: speed {log['v_h'].min():.1f}..{log['v_h'].max():.1f} m/s, "
      f"altitude {log['z'].min():.1f}..{log['z'].max():.1f} m")
print(f"all floor/velocity/acceleration flags ok: "
      f"{bool((log['floor_ok'] * log['velocity_ok'] * log['acceleration_ok']).all())}")
