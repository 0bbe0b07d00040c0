from collections import Counter
from typing import Dict, Hashable


class RankUnionFind:
    """
    Disjoint sets with path compression and union by rank.

    Examples
    --------
    >>> uf = RankUnionFind()
    >>> uf.union(1, 2)
    >>> uf.union(4, 5)
    >>> uf.find(2) == uf.find(1)
    True
    >>> uf.find(4) == uf.find(1)
    False
    """

    def __init__(self):
        self.parent: Dict[Hashable, Hashable] = {}
        self.rank = Counter()

    def find(self, x):
        if x not in self.parent:
            self.parent[x] = x
            return x

        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        # path compression
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        px = self.find(x)
        py = self.find(y)
        if px == py:
            return
        if self.rank[px] < self.rank[py]:
            self.parent[px] = py
        elif self.rank[px] > self.rank[py]:
            self.parent[py] = px
        else:
            self.parent[py] = px
            self.rank[px] += 1

    def count_sets(self, elements) -> int:
        return len({self.find(e) for e in elements})
