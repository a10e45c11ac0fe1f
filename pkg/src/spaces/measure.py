"""
Finite Measure Spaces
Atomic measure spaces and their partitions (finite sub-sigma-algebras).
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from src.errors import ValidationError


@dataclass(frozen=True)
class MeasureSpace:
    """Finitely many atoms, each carrying a strictly positive mass"""
    weights: Tuple[float, ...]
    mu: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mu = np.asarray(self.weights, dtype=float)
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    @property
    def atom_count(self) -> int:
        return len(self.weights)

    @property
    def total_mass(self) -> float:
        return float(self.mu.sum())

    def to_dict(self) -> Dict[str, Any]:
        return {"weights": list(self.weights)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MeasureSpace":
        if "weights" not in data:
            raise ValidationError("measure space needs a 'weights' entry")
        return make_measure_space(data["weights"])


def make_measure_space(weights: Sequence[float]) -> MeasureSpace:
    """Validate weights and build the measure space"""
    values = [float(w) for w in weights]
    if not values:
        raise ValidationError("a measure space needs at least one atom")
    for index, weight in enumerate(values):
        if not np.isfinite(weight) or weight <= 0.0:
            raise ValidationError(f"atom {index} has non-positive weight {weight}")
    return MeasureSpace(tuple(values))


def counting_measure(n: int) -> MeasureSpace:
    return make_measure_space([1.0] * n)


def uniform_probability(n: int) -> MeasureSpace:
    return make_measure_space([1.0 / n] * n)


@dataclass(frozen=True)
class Partition:
    """Disjoint nonempty blocks covering all atoms, in canonical order"""
    blocks: Tuple[Tuple[int, ...], ...]
    atom_count: int

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    def block_index(self) -> np.ndarray:
        """Array mapping each atom to the index of its block"""
        index = np.empty(self.atom_count, dtype=int)
        for b, block in enumerate(self.blocks):
            index[list(block)] = b
        return index

    def block_masses(self, space: MeasureSpace) -> np.ndarray:
        return np.array([space.mu[list(block)].sum() for block in self.blocks])

    def to_dict(self) -> Dict[str, Any]:
        return {"blocks": [list(block) for block in self.blocks]}


def make_partition(blocks: Iterable[Iterable[int]], space: MeasureSpace) -> Partition:
    """Validate and canonicalize a partition of the atoms of `space`"""
    n = space.atom_count
    seen: Dict[int, int] = {}
    canonical: List[Tuple[int, ...]] = []
    for b, block in enumerate(blocks):
        members = sorted(int(a) for a in block)
        if not members:
            raise ValidationError(f"block {b} is empty")
        for atom in members:
            if atom < 0 or atom >= n:
                raise ValidationError(f"atom {atom} in block {b} is out of range 0..{n - 1}")
            if atom in seen:
                raise ValidationError(f"atom {atom} appears in blocks {seen[atom]} and {b}")
            seen[atom] = b
        canonical.append(tuple(members))
    missing = sorted(set(range(n)) - set(seen))
    if missing:
        raise ValidationError(f"atoms {missing} are not covered by any block")
    canonical.sort(key=lambda block: block[0])
    return Partition(tuple(canonical), n)


def discrete_partition(space: MeasureSpace) -> Partition:
    return make_partition([[a] for a in range(space.atom_count)], space)


def trivial_partition(space: MeasureSpace) -> Partition:
    return make_partition([list(range(space.atom_count))], space)


def is_coarser(coarse: Partition, fine: Partition) -> bool:
    """True iff every block of `fine` lies inside a block of `coarse`"""
    if coarse.atom_count != fine.atom_count:
        return False
    owner = coarse.block_index()
    return all(len({owner[a] for a in block}) == 1 for block in fine.blocks)
