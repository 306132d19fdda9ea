"""Pure-Python implementations of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable, or when
``TCEC_PURE_PYTHON=1`` is set.  Every function here has the same signature
and produces bit-identical results to its Cython twin.
"""
import numpy as np

WALK_SIMPLE = 0
WALK_DEGREE_WEIGHTED = 1
WALK_METROPOLIS = 2


class CandidateScorer:
    """Evaluates the three squared norms of the candidate criterion.

    Holds CSR views of the out- and in-adjacency plus reusable scratch space,
    so repeated calls allocate nothing proportional to ``n``.
    """

    def __init__(self, out_indptr, out_indices, out_weights,
                 in_indptr, in_indices, in_weights):
        self.out_indptr = out_indptr.tolist()
        self.out_indices = out_indices.tolist()
        self.out_weights = out_weights.tolist()
        self.in_indptr = in_indptr.tolist()
        self.in_indices = in_indices.tolist()
        self.in_weights = in_weights.tolist()

    def score_terms(self, member_mask, j):
        """Return ``(|b1|^2, |b1^T U|^2, |b3|^2)`` for candidate ``j``."""
        mask = member_mask
        oip, oix, ow = self.out_indptr, self.out_indices, self.out_weights
        iip, iix, iw = self.in_indptr, self.in_indices, self.in_weights

        b1sq = 0.0
        acc = {}
        for e in range(oip[j], oip[j + 1]):
            i = oix[e]
            if not mask[i]:
                continue
            w_ji = ow[e]
            b1sq += w_ji * w_ji
            for f in range(iip[i], iip[i + 1]):
                l = iix[f]
                if l == j or mask[l]:
                    continue
                acc[l] = acc.get(l, 0.0) + w_ji * iw[f]

        b1u = 0.0
        for val in acc.values():
            b1u += val * val

        b3sq = 0.0
        for f in range(iip[j], iip[j + 1]):
            l = iix[f]
            if mask[l]:
                continue
            b3sq += iw[f] * iw[f]
        return b1sq, b1u, b3sq


def walk_trajectory(indptr, indices, cum, degree, variant, start, uniforms):
    """Advance a walk from ``start``, one step per uniform (two for MH).

    ``cum`` is the global cumulative sum of transition weights laid out in
    CSR order (ignored for Metropolis-Hastings).  Returns the visited node
    after every step.
    """
    indptr = indptr.tolist()
    indices = indices.tolist()
    cum = cum.tolist()
    degree = degree.tolist()
    u = uniforms.tolist()
    per_step = 2 if variant == WALK_METROPOLIS else 1
    n_steps = len(u) // per_step
    out = [0] * n_steps
    cur = int(start)
    for t in range(n_steps):
        a = indptr[cur]
        b = indptr[cur + 1]
        if b > a:
            if variant == WALK_METROPOLIS:
                k = a + int(u[2 * t] * (b - a))
                if k >= b:
                    k = b - 1
                prop = indices[k]
                if u[2 * t + 1] * degree[prop] < degree[cur]:
                    cur = prop
            else:
                base = cum[a - 1] if a > 0 else 0.0
                target = base + u[t] * (cum[b - 1] - base)
                # first k in [a, b) with cum[k] > target
                lo, hi = a, b - 1
                while lo < hi:
                    mid = (lo + hi) // 2
                    if cum[mid] > target:
                        hi = mid
                    else:
                        lo = mid + 1
                cur = indices[lo]
        out[t] = cur
    return np.asarray(out, dtype=np.int64)


def kendall_counts(x, y):
    """Tie and discordance counts for Kendall tau-b.

    ``x`` and ``y`` must already be sorted lexicographically by ``(x, y)``.
    Returns ``(x_ties, y_ties, joint_ties, swaps)`` as pair counts.
    """
    xs = x.tolist()
    ys = y.tolist()
    n = len(xs)

    x_ties = 0
    joint_ties = 0
    run_x = 1
    run_xy = 1
    for k in range(1, n):
        if xs[k] == xs[k - 1]:
            run_x += 1
            if ys[k] == ys[k - 1]:
                run_xy += 1
            else:
                joint_ties += run_xy * (run_xy - 1) // 2
                run_xy = 1
        else:
            x_ties += run_x * (run_x - 1) // 2
            joint_ties += run_xy * (run_xy - 1) // 2
            run_x = 1
            run_xy = 1
    x_ties += run_x * (run_x - 1) // 2
    joint_ties += run_xy * (run_xy - 1) // 2

    # bottom-up merge sort on y counting inversions
    buf = [0.0] * n
    swaps = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if ys[j] < ys[i]:
                    buf[k] = ys[j]
                    swaps += mid - i
                    j += 1
                else:
                    buf[k] = ys[i]
                    i += 1
                k += 1
            while i < mid:
                buf[k] = ys[i]
                i += 1
                k += 1
            while j < hi:
                buf[k] = ys[j]
                j += 1
                k += 1
        ys, buf = buf, ys
        width *= 2

    y_ties = 0
    run_y = 1
    for k in range(1, n):
        if ys[k] == ys[k - 1]:
            run_y += 1
        else:
            y_ties += run_y * (run_y - 1) // 2
            run_y = 1
    y_ties += run_y * (run_y - 1) // 2
    return x_ties, y_ties, joint_ties, swaps
