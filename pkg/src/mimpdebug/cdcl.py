"""Conflict-driven clause-learning SAT solver over CNF.

The solve loop is a single array-based kernel, JIT-compiled with numba by
default. Setting the environment variable MIMPDEBUG_PURE_PYTHON=1 selects
the identical pure-Python/numpy path instead (slower, dependency-free at
runtime); bench/bench_sat.py compares the two.

Literal encoding: variable v in 1..n, literal 2*v (positive) or 2*v+1
(negative), DIMACS-style input lists use signed ints.
"""

from __future__ import annotations

import os

import numpy as np

SAT = 1
UNSAT = 0
UNDECIDED = -1  # conflict budget exceeded

PURE_PYTHON = os.environ.get("MIMPDEBUG_PURE_PYTHON", "") == "1"


def _solve_kernel(n_vars, in_lits, in_starts, max_conflicts):
    """CDCL search. Returns (status, model) with model[v] in {0,1}.

    in_lits/in_starts describe the clause database in encoded-literal form;
    learned clauses are appended in place of a separate store.
    """
    n_orig = in_starts.shape[0] - 1

    cap_lits = max(4 * in_lits.shape[0] + 16, 1024)
    cap_cls = max(4 * n_orig + 16, 256)
    lits = np.empty(cap_lits, np.int32)
    lits[:in_lits.shape[0]] = in_lits
    n_lits = in_lits.shape[0]
    starts = np.empty(cap_cls + 1, np.int32)
    starts[:n_orig + 1] = in_starts
    n_cls = n_orig

    next0 = np.full(cap_cls, -1, np.int32)
    next1 = np.full(cap_cls, -1, np.int32)
    head = np.full(2 * n_vars + 2, -1, np.int32)

    assign = np.full(n_vars + 1, -1, np.int8)
    level = np.zeros(n_vars + 1, np.int32)
    reason = np.full(n_vars + 1, -1, np.int32)
    trail = np.empty(n_vars + 1, np.int32)
    trail_len = 0
    trail_lim = np.empty(n_vars + 2, np.int32)
    lim_len = 0
    qhead = 0

    activity = np.zeros(n_vars + 1, np.float64)
    phase = np.zeros(n_vars + 1, np.int8)
    var_inc = 1.0

    seen = np.zeros(n_vars + 1, np.int8)
    learnt_buf = np.empty(n_vars + 1, np.int32)

    model = np.zeros(n_vars + 1, np.int8)

    # --- helpers inlined as code blocks (numba-friendly) ---

    # attach original clauses; collect initial units
    status = 2  # 2 = still searching
    for c in range(n_cls):
        s, e = starts[c], starts[c + 1]
        if e - s == 0:
            status = UNSAT
            break
        if e - s == 1:
            l = lits[s]
            v = l >> 1
            val = 1 - (l & 1)
            if assign[v] == -1:
                assign[v] = val
                level[v] = 0
                reason[v] = -1
                trail[trail_len] = l
                trail_len += 1
            elif assign[v] != val:
                status = UNSAT
                break
        else:
            next0[c] = head[lits[s]]
            head[lits[s]] = c
            next1[c] = head[lits[s + 1]]
            head[lits[s + 1]] = c

    n_conflicts = 0
    restart_limit = 100.0
    conflicts_since_restart = 0

    while status == 2:
        # ---------------- propagate ----------------
        confl = -1
        while qhead < trail_len:
            p = trail[qhead]
            qhead += 1
            fl = p ^ 1  # literal that just became false
            c = head[fl]
            prev = -1
            prev_slot = 0
            while c != -1:
                s = starts[c]
                if lits[s] == fl:
                    # move the false literal to slot 1
                    lits[s] = lits[s + 1]
                    lits[s + 1] = fl
                    tmp = next0[c]
                    next0[c] = next1[c]
                    next1[c] = tmp
                nxt = next1[c]
                other = lits[s]
                ov = other >> 1
                oval = assign[ov]
                osat = (oval != -1) and (oval == 1 - (other & 1))
                if osat:
                    prev = c
                    prev_slot = 1
                    c = nxt
                    continue
                # search replacement watch
                found = -1
                e = starts[c + 1]
                for j in range(s + 2, e):
                    l2 = lits[j]
                    v2 = l2 >> 1
                    val2 = assign[v2]
                    if val2 == -1 or val2 == 1 - (l2 & 1):
                        found = j
                        break
                if found != -1:
                    l2 = lits[found]
                    lits[found] = fl
                    lits[s + 1] = l2
                    # unlink c from fl's list, link into l2's list
                    if prev == -1:
                        head[fl] = nxt
                    elif prev_slot == 0:
                        next0[prev] = nxt
                    else:
                        next1[prev] = nxt
                    next1[c] = head[l2]
                    head[l2] = c
                    c = nxt
                    continue
                if oval == -1:
                    # unit: enqueue other
                    assign[ov] = 1 - (other & 1)
                    level[ov] = lim_len
                    reason[ov] = c
                    trail[trail_len] = other
                    trail_len += 1
                    prev = c
                    prev_slot = 1
                    c = nxt
                else:
                    confl = c
                    break
            if confl != -1:
                break

        if confl != -1:
            # ---------------- conflict ----------------
            n_conflicts += 1
            conflicts_since_restart += 1
            if lim_len == 0:
                status = UNSAT
                break
            if n_conflicts > max_conflicts:
                status = UNDECIDED
                break
            # 1UIP analysis
            learnt_len = 1  # slot 0 reserved for asserting literal
            counter = 0
            p = -1
            idx = trail_len - 1
            c = confl
            while True:
                s, e = starts[c], starts[c + 1]
                for j in range(s, e):
                    q = lits[j]
                    if p != -1 and q == p:
                        continue
                    v = q >> 1
                    if seen[v] == 0 and level[v] > 0:
                        seen[v] = 1
                        activity[v] += var_inc
                        if level[v] >= lim_len:
                            counter += 1
                        else:
                            learnt_buf[learnt_len] = q
                            learnt_len += 1
                while seen[trail[idx] >> 1] == 0:
                    idx -= 1
                p = trail[idx]
                v = p >> 1
                seen[v] = 0
                counter -= 1
                if counter == 0:
                    break
                c = reason[v]
                idx -= 1
            learnt_buf[0] = p ^ 1
            for j in range(1, learnt_len):
                seen[learnt_buf[j] >> 1] = 0

            # backjump level = max level among learnt[1:]
            bt = 0
            for j in range(1, learnt_len):
                lv = level[learnt_buf[j] >> 1]
                if lv > bt:
                    bt = lv
            # move a literal of level bt to slot 1 (watch invariant)
            if learnt_len > 2:
                for j in range(1, learnt_len):
                    if level[learnt_buf[j] >> 1] == bt:
                        tmp = learnt_buf[1]
                        learnt_buf[1] = learnt_buf[j]
                        learnt_buf[j] = tmp
                        break

            # backtrack to bt
            while lim_len > bt:
                lim_len -= 1
                lim = trail_lim[lim_len]
                for k in range(trail_len - 1, lim - 1, -1):
                    lv = trail[k] >> 1
                    phase[lv] = assign[lv]
                    assign[lv] = -1
                    reason[lv] = -1
                trail_len = lim
            if qhead > trail_len:
                qhead = trail_len

            # add learnt clause
            if learnt_len == 1:
                l = learnt_buf[0]
                v = l >> 1
                assign[v] = 1 - (l & 1)
                level[v] = 0
                reason[v] = -1
                trail[trail_len] = l
                trail_len += 1
            else:
                if n_cls + 1 >= cap_cls:
                    cap_cls *= 2
                    ns = np.empty(cap_cls + 1, np.int32)
                    ns[:n_cls + 1] = starts[:n_cls + 1]
                    starts = ns
                    n0 = np.full(cap_cls, -1, np.int32)
                    n0[:n_cls] = next0[:n_cls]
                    next0 = n0
                    n1 = np.full(cap_cls, -1, np.int32)
                    n1[:n_cls] = next1[:n_cls]
                    next1 = n1
                if n_lits + learnt_len >= cap_lits:
                    while n_lits + learnt_len >= cap_lits:
                        cap_lits *= 2
                    nl = np.empty(cap_lits, np.int32)
                    nl[:n_lits] = lits[:n_lits]
                    lits = nl
                c_new = n_cls
                for j in range(learnt_len):
                    lits[n_lits + j] = learnt_buf[j]
                starts[c_new + 1] = n_lits + learnt_len
                n_lits += learnt_len
                n_cls += 1
                s = starts[c_new]
                next0[c_new] = head[lits[s]]
                head[lits[s]] = c_new
                next1[c_new] = head[lits[s + 1]]
                head[lits[s + 1]] = c_new
                # assert the UIP literal
                l = learnt_buf[0]
                v = l >> 1
                assign[v] = 1 - (l & 1)
                level[v] = lim_len
                reason[v] = c_new
                trail[trail_len] = l
                trail_len += 1

            # decay activities
            var_inc /= 0.95
            if var_inc > 1e100:
                for v2 in range(1, n_vars + 1):
                    activity[v2] *= 1e-100
                var_inc *= 1e-100
            continue

        # ---------------- no conflict ----------------
        if conflicts_since_restart >= restart_limit and lim_len > 0:
            conflicts_since_restart = 0
            restart_limit *= 1.5
            while lim_len > 0:
                lim_len -= 1
                lim = trail_lim[lim_len]
                for k in range(trail_len - 1, lim - 1, -1):
                    lv = trail[k] >> 1
                    phase[lv] = assign[lv]
                    assign[lv] = -1
                    reason[lv] = -1
                trail_len = lim
            if qhead > trail_len:
                qhead = trail_len
            continue

        # decide: unassigned variable with max activity, lowest index wins ties
        best_v = -1
        best_a = -1.0
        for v in range(1, n_vars + 1):
            if assign[v] == -1 and activity[v] > best_a:
                best_a = activity[v]
                best_v = v
        if best_v == -1:
            for v in range(1, n_vars + 1):
                model[v] = assign[v]
            status = SAT
            break
        trail_lim[lim_len] = trail_len
        lim_len += 1
        l = 2 * best_v + (1 - int(phase[best_v]))  # saved phase, default False
        assign[best_v] = phase[best_v]
        level[best_v] = lim_len
        reason[best_v] = -1
        trail[trail_len] = l
        trail_len += 1

    return status, model


if PURE_PYTHON:
    _solve = _solve_kernel
else:
    from numba import njit

    _solve = njit(cache=True)(_solve_kernel)


class CnfSolver:
    """Thin object wrapper: collect clauses, then solve once."""

    def __init__(self):
        self.n_vars = 0
        self.clauses = []

    def new_var(self):
        self.n_vars += 1
        return self.n_vars

    def add_clause(self, clause):
        """clause: iterable of signed DIMACS literals (nonzero ints)."""
        self.clauses.append(tuple(clause))

    def solve(self, max_conflicts=10_000_000):
        """Returns (status, model) with model a dict var -> bool (SAT only)."""
        lits = []
        starts = [0]
        for cl in self.clauses:
            for sl in cl:
                v = abs(sl)
                lits.append(2 * v + (1 if sl < 0 else 0))
            starts.append(len(lits))
        arr_lits = np.asarray(lits, np.int32)
        arr_starts = np.asarray(starts, np.int32)
        status, model = _solve(self.n_vars, arr_lits, arr_starts,
                               max_conflicts)
        if status == SAT:
            return SAT, {v: bool(model[v]) for v in range(1, self.n_vars + 1)}
        return status, None
