"""Where the compute goes: parameters and multiply-accumulates per design.

The analyzer walks each architecture's layer graph symbolically, so the
numbers come out in well under a second and split cleanly into work done
once per mixture (const) and work repeated per decoded source.  That
split is the whole argument for prompt-conditioned coding: the shared
encoder is paid for once no matter how many sources are requested.
"""

from sunac import analysis

report = analysis.compare_report(duration_s=1.0, n_sources=3)
print(analysis.format_report_text(report))

# -- per-layer detail for the prompt-conditioned design

row = analysis.count_macs(analysis.builtin_specs()["SUNAC"], 1.0, 16000)
print(f"\nSUNAC layer detail, 1.0 s of audio "
      f"({row.params / 1e6:.2f}M parameters):")
top = sorted(row.layers, key=lambda c: c.macs, reverse=True)[:8]
for cost in top:
    print(f"  {cost.name:<28} {cost.kind:<18} {cost.tag:<10} "
          f"{cost.macs / 1e6:>10.1f}M  {cost.scaling}")
print("  ...")
const = sum(c.macs for c in row.layers if c.tag == "const")
per = sum(c.macs for c in row.layers if c.tag == "per_source")
print(f"\nconst total {const / 1e9:.2f}G, per-source total {per / 1e9:.2f}G")

# -- how the split pays off as the source count grows

sunac = {r.arch: r for r in report.rows}["SUNAC"]
sdcodec = {r.arch: r for r in report.rows}["SDCodec"]
print("\ntotal GMACs by requested source count:")
print(f"  {'sources':<8} {'SUNAC':>8} {'SDCodec':>8}")
for n in (1, 2, 3, 4):
    print(f"  {n:<8} {sunac.total_macs(n) / 1e9:>8.2f} "
          f"{sdcodec.total_macs(n) / 1e9:>8.2f}")
