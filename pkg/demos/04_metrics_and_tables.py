"""
Metrics and results tables
==========================

Accuracy plus macro and weighted precision, recall and F1, rendered in the
column layout of the published results tables.
"""

from stressid.corpus import LABELS
from stressid.metrics import MetricsReport, compute_metrics, confusion, render_metrics, render_table

N, S = LABELS

# %%
# Four predictions, one mistake.
cm = confusion([S, S, N, N], [S, N, N, N])
print(cm.counts)
report = compute_metrics(cm)
for label, stats in report.per_class.items():
    print(label, stats)
print("macro", report.macro, "weighted", report.weighted, "accuracy", report.accuracy)

# %%
# One row of seven values, rounded half-even to three decimals.
print(render_metrics(report))

# %%
# The Telugu/Tamil "This proposal" numbers from the comparison table render
# back to the same row.
values = [0.734, 0.780, 0.767, 0.737, 0.734, 0.818, 0.734]
published = MetricsReport(LABELS, ((0, 0), (0, 0)), {}, dict(zip(("f1", "recall", "precision"), values[:3])),
                          dict(zip(("f1", "recall", "precision"), values[3:6])), values[6])
print(render_metrics(published))
print(render_table([("Tamil", "This proposal", published), ("Telugu", "(not scored)", None)], "table4"))
