"""Error-rate behaviour as the decision threshold moves.

Runs the bundled stage-1 experiment at a ladder of thresholds and prints
how false accepts trade against false rejects, along with the equal error
rate computed from the pooled normalized scores.
"""

from pathlib import Path

from voxid.experiment import parse_experiment_config, run_experiment

text = Path(__file__).with_name("experiment-stage1.conf").read_text()
base = parse_experiment_config(text)

config = base.__class__(
    **{**base.__dict__, "thresholds": (0.0, 0.5, 1.0, 1.5, 2.0, 2.5)}
)
reports = run_experiment(config)

print(f"{config.num_true_speakers} enrolled speakers, "
      f"{config.num_impostors} impostors, {len(reports[0].per_trial)} trials\n")
print("threshold   FA   FR   top-1")
for report in reports:
    print(f"   {report.threshold:4.1f}    {report.false_accepts:3d}  "
          f"{report.false_rejects:3d}   {report.top1_accuracy:.2f}")

print(f"\nequal error rate over the pooled normalized scores: {reports[0].eer:.3f}")
