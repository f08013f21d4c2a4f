"""Two sharpness stories: the Young-type inequality and the mean bound.

First, the scalar inequality u <= 2k/3 + g(u)/(3k^2) with g(u) = min(u^2,
u^3) holds for every u >= 0 exactly while k <= 8/9, and fails just above:
the slack Delta(k, u) has closed-form minimum over k that is zero up to
u = 8/9 and positive beyond, while k = 0.9 already admits a negative value.

Second, the bound E|X_i| <= v beta_v^(1/3) cannot be improved: a family
with one heavy summand and n-1 light ones pushes the ratio to one.
"""

from fractions import Fraction as F

import sumtails as st

# The boundary at k = 8/9 is exact: the slack vanishes at u = 32/27 ...
print("Delta(8/9, 32/27) =", st.young_delta(F(8, 9), F(32, 27)).delta)
# ... and k = 0.9 dips negative at u = 3 k^2 / 2 = 1.215:
print("Delta(0.9, 1.215) =", st.young_delta(0.9, 1.215).delta)

# The closed-form minimum over k in (0, 8/9] is piecewise and exact:
for u in (F(1, 2), F(19, 20), F(2)):
    print(f"Delta*({u}) = {st.young_delta_star(u)}")

# A full grid scan (879 k values x 10001 u values) finds no violation for
# k <= 8/9 and confirms the closed form against the grid minimum:
violations, gap = st.young_grid_scan()
print(f"grid scan: {len(violations)} violations, closed-form gap {gap:.2e}")

# Now the mean bound.  The extremal family fixes |X_1| = x and |X_i| = y
# for i >= 2 with x = (1 + (n-1)^(1/6))^(-1/2) and y = x / (n-1)^(5/12),
# which satisfies the unit-variance normalization identically.  The ratio
# E|X_1| / (v beta_v^(1/3)) has closed form (1 + (n-1)^(-1/4))^(-1/3):
print(f"\n{'n-1':>10} {'ratio':>10} {'closed form':>12}")
for m in (1, 10**2, 10**4, 10**6, 10**8):
    rep = st.extremal_report(m + 1)
    print(f"{m:>10} {rep.ratio:>10.6f} {rep.ratio_closed_form:>12.6f}")
# The ratio climbs toward 1: no smaller constant than 1 can work.

# On a generic corpus the bound holds with room to spare (scale v = 2 keeps
# beta_v below the (8/9)^3 regime threshold for every unit-variance system):
corpus = st.gen_corpus(st.CorpusSpec(seed=1, count=200))
report = st.mean_abs_sharpness(corpus, v=2.0)
print(f"\ncorpus scan at v=2: {report.n_checked} summands, "
      f"{len(report.violations)} violations, max ratio {report.max_ratio:.4f}")
