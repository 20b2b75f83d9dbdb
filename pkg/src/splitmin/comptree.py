"""Weighted computation trees of the splitting updates and their exact root marginals.

Every tree edge carries the coefficient that multiplies the message crossing it:

* variable -> factor ``b``: ``c_b`` (or ``c_b - 1`` when ``b`` is the factor the
  variable was reached from),
* factor -> variable ``k``: ``c_k`` (or ``c_i - 1`` for the copy of the variable the
  factor was reached from).

The copy created by a factor's return edge is the same variable as the
factor's parent, so it shares its slot; every other variable node opens a new
slot.  A node's accumulated weight is the product of edge weights on its root
path.  Branches with weight 0 are pruned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import FactorGraph
from .params import SplitParams

MAX_DEPTH = 8
MAX_NODES = 100_000


class TreeTooLarge(RuntimeError):
    pass


@dataclass
class TreeNode:
    kind: str                # "var" or "factor"
    ident: int               # original variable or factor id
    weight: float            # accumulated product of edge weights from the root
    slot: int = -1           # variable nodes: index of the (shared) variable slot
    parent_pos: int = -1     # factor nodes: scope position of the parent variable
    children: list["TreeNode"] = field(default_factory=list)

    def potential_weight(self, c: SplitParams) -> float:
        """Multiplier of ``phi`` (variable) or ``psi`` (factor) at this node."""
        return self.weight / (c.c_var[self.ident] if self.kind == "var" else c.c_fac[self.ident])


@dataclass
class CompTree:
    graph: FactorGraph
    params: SplitParams
    root: TreeNode
    depth: int
    n_nodes: int
    n_slots: int

    def dump(self) -> str:
        lines = []

        def walk(node: TreeNode, indent: int) -> None:
            label = f"x{node.ident} [slot {node.slot}]" if node.kind == "var" else f"psi{node.ident}"
            lines.append(f"{'  ' * indent}{label} weight={node.weight:.6g}")
            for ch in node.children:
                walk(ch, indent + 1)

        walk(self.root, 0)
        return "\n".join(lines)

    def nodes(self):
        stack = [self.root]
        while stack:
            u = stack.pop()
            yield u
            stack.extend(u.children)


def build_computation_tree(g: FactorGraph, c: SplitParams, root: int, t: int) -> CompTree:
    """Tree whose root marginal equals ``b_root`` after ``t`` sync sweeps from zero messages."""
    if t < 0:
        raise ValueError("depth must be nonnegative")
    if t > MAX_DEPTH:
        raise TreeTooLarge(f"depth {t} exceeds {MAX_DEPTH}")
    counter = {"nodes": 1, "slots": 1}

    def new_slot() -> int:
        counter["slots"] += 1
        return counter["slots"] - 1

    def bump() -> None:
        counter["nodes"] += 1
        if counter["nodes"] > MAX_NODES:
            raise TreeTooLarge(f"computation tree exceeds {MAX_NODES} nodes")

    def grow_var(node: TreeNode, from_factor: int | None, remaining: int) -> None:
        if remaining == 0:
            return
        i = node.ident
        for b in g.incidence[i]:
            w = c.c_fac[b] - 1.0 if b == from_factor else c.c_fac[b]
            if w == 0:
                continue
            bump()
            child = TreeNode("factor", b, node.weight * w, parent_pos=g.position(b, i))
            node.children.append(child)
            grow_factor(child, node, remaining - 1)

    def grow_factor(node: TreeNode, parent: TreeNode, remaining: int) -> None:
        if remaining == 0:
            return
        fac = g.factors[node.ident]
        for q, k in enumerate(fac.scope):
            if q == node.parent_pos:
                w = c.c_var[k] - 1.0
                slot = parent.slot
            else:
                w = c.c_var[k]
                slot = None
            if w == 0:
                continue
            bump()
            child = TreeNode("var", k, node.weight * w, slot=new_slot() if slot is None else slot)
            node.children.append(child)
            grow_var(child, node.ident, remaining - 1)

    root_node = TreeNode("var", root, 1.0, slot=0)
    grow_var(root_node, None, t)
    return CompTree(g, c, root_node, t, counter["nodes"], counter["slots"])


def tree_root_belief(tree: CompTree) -> np.ndarray:
    """Exact root marginal: min over slots with nonnegative weight, max over negative ones.

    A factor node quantifies the fresh variables of its scope once, using the
    sign of its own accumulated weight (which is also the weight multiplying
    each fresh child's self-potential ``phi``).  The result is min-normalized.
    """
    g, c = tree.graph, tree.params

    def var_value(node: TreeNode) -> np.ndarray:
        # function of this node's slot value
        val = node.potential_weight(c) * g.phis[node.ident]
        for ch in node.children:
            val = val + factor_value(ch)
        return val

    def factor_value(node: TreeNode) -> np.ndarray:
        # function of the parent variable's value
        fac = g.factors[node.ident]
        p = node.parent_pos
        table = node.potential_weight(c) * fac.table
        echo = 0.0
        for ch in node.children:
            q = fac.scope.index(ch.ident)
            if q == p:
                echo = echo + var_value(ch)
            else:
                shape = [1] * fac.size
                shape[q] = g.cards[ch.ident]
                table = table + var_value(ch).reshape(shape)
        axes = tuple(q for q in range(fac.size) if q != p)
        if axes:
            table = table.min(axis=axes) if node.weight >= 0 else table.max(axis=axes)
        return table + echo

    out = var_value(tree.root)
    return out - out.min()
