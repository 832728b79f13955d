"""Control-flow graph over MiniImp programs.

Nodes are statement labels plus distinguished ENTRY/EXIT; conditional nodes
carry exactly one true-tagged and one false-tagged outgoing edge. Branches
are identified as (conditional label, polarity) and displayed in edge form
(cond, successor), e.g. (5,8).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import lang

ENTRY = "entry"
EXIT = "exit"


@dataclass(frozen=True)
class Branch:
    """One outgoing edge of a conditional: identified by (cond, polarity)."""

    cond: object  # conditional statement label
    polarity: bool
    target: object = field(compare=False, hash=False, default=None)

    @property
    def edge(self):
        return (self.cond, self.target)

    def __repr__(self):
        pol = "T" if self.polarity else "F"
        return f"Branch({self.cond},{pol}->{self.target})"


@dataclass
class Cfg:
    program: lang.MiniImpProgram
    nodes: list
    edges: list  # (src, dst, tag) with tag in {None, True, False}
    branches: dict  # cond label -> (true Branch, false Branch)
    has_loops: bool = False

    def succ(self, node, tag=None):
        for s, d, t in self.edges:
            if s == node and t == tag:
                return d
        return None

    def branch(self, cond, polarity):
        t, f = self.branches[cond]
        return t if polarity else f

    def sibling(self, br):
        t, f = self.branches[br.cond]
        return f if br.polarity else t


def build_cfg(prog):
    """Build the CFG of a parsed program.

    Branch identifiers are stable across runs: they derive solely from
    statement labels and the structured layout.
    """
    edges = []
    branches = {}
    has_loops = False

    def first_label(body, after):
        return body[0].label if body else after

    def wire(body, after):
        """Wire `body` so control falls through to node `after`; return the
        entry node of the block."""
        nonlocal has_loops
        entry = first_label(body, after)
        for i, st in enumerate(body):
            nxt = first_label(body[i + 1:], after)
            if isinstance(st, (lang.Assign, lang.Assert)):
                edges.append((st.label, nxt, None))
            elif isinstance(st, lang.If):
                t_target = wire(st.then_body, nxt)
                f_target = wire(st.else_body, nxt)
                edges.append((st.label, t_target, True))
                edges.append((st.label, f_target, False))
                branches[st.label] = (
                    Branch(st.label, True, t_target),
                    Branch(st.label, False, f_target),
                )
            elif isinstance(st, lang.While):
                has_loops = True
                body_entry = wire(st.body, st.label)  # back edge to header
                edges.append((st.label, body_entry, True))
                edges.append((st.label, nxt, False))
                branches[st.label] = (
                    Branch(st.label, True, body_entry),
                    Branch(st.label, False, nxt),
                )
        return entry

    start = wire(prog.body, EXIT)
    edges.insert(0, (ENTRY, start, None))
    nodes = [ENTRY] + [st.label for st in lang.iter_stmts(prog.body)] + [EXIT]
    return Cfg(program=prog, nodes=nodes, edges=edges,
               branches=branches, has_loops=has_loops)


def count_paths(body):
    """Number of complete acyclic paths through a loop-free structured body
    (or a whole Cfg)."""
    if isinstance(body, Cfg):
        body = body.program.body
    total = 1
    for st in body:
        if isinstance(st, lang.If):
            total *= count_paths(st.then_body) + count_paths(st.else_body)
        elif isinstance(st, lang.While):
            raise ValueError("count_paths requires a loop-free body")
    return total
