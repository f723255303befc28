"""Measure a 1-D landscape through a bent coordinate.

A double-well loss has two minima of equal curvature. Reading the same
loss through a nonlinear change of coordinate keeps the minima (and the
loss values at them) but multiplies the curvature at each minimum by
1/h'(t)^2, where h is the coordinate map. Flat or sharp is a statement
about the ruler, not about the function.
"""

from flatlab import PowerStretch, reparam_demo_1d

# identity coordinate first: both wells look identical
flat = reparam_demo_1d("double_well", PowerStretch(0.0, 0.0, 1.0), -2.0, 2.0)
print("identity coordinate:")
for m in flat.minima:
    print(f"  minimum at eta={m.eta:+.4f}   curvature {m.fd_curvature:.4f}")

# now stretch space around t = 0.8; the right well sits where the ruler
# is compressed, so its curvature reading balloons
bent = reparam_demo_1d("double_well", PowerStretch(0.8, 1.0, 0.05), -2.0, 2.0)
print("\nstretched coordinate (center 0.8):")
for m in bent.minima:
    line = (f"  minimum at eta={m.eta:+.4f}   curvature {m.fd_curvature:.4f}"
            f"   predicted {m.predicted_curvature:.4f}")
    print(line)

ratio = bent.minima[1].fd_curvature / bent.minima[0].fd_curvature
print(f"\nsame function, curvature ratio between the wells: {ratio:.1f}")

# the prediction (g')^2 L'' coming from the chain rule is not an
# approximation; the table error is finite-difference noise only
worst = max(abs(m.fd_curvature - m.predicted_curvature) /
            max(abs(m.predicted_curvature), 1e-12) for m in bent.minima)
print(f"worst relative gap to the chain-rule prediction: {worst:.2e}")
