"""
Feature Configuration

Ordered value lists behind the one-hot atom and bond features. Lists are
discovered on the development split; a value missing from a list encodes as
an all-zero block.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Union

FEATURE_FORMAT_VERSION = 1

BOND_TYPE_VALUES = ["supernode", "self", "single", "double", "triple", "aromatic"]
BOND_STEREO_VALUES = ["none", "Z", "E"]
CHIRAL_VALUES = ["none", "@", "@@"]


@dataclass
class FeatureConfig:
    """One-hot layout of atoms and bonds"""
    atomic_numbers: List[int] = field(default_factory=list)
    formal_charges: List[int] = field(default_factory=list)
    chiral_tags: List[str] = field(default_factory=lambda: list(CHIRAL_VALUES))
    explicit_h_counts: List[int] = field(default_factory=list)
    bond_types: List[str] = field(default_factory=lambda: list(BOND_TYPE_VALUES))
    bond_stereos: List[str] = field(default_factory=lambda: list(BOND_STEREO_VALUES))
    use_chirality: bool = True  # USPTO-MIT drops the chiral tag block
    use_bond_stereo: bool = True  # ...and the bond stereo block
    mark_reactants: bool = False  # forward "separated" variant

    @classmethod
    def uspto_mit(cls) -> 'FeatureConfig':
        return cls(use_chirality=False, use_bond_stereo=False)

    @property
    def atom_blocks(self) -> List[tuple]:
        """(name, values) per atom feature block, in column order."""
        blocks = [('is_supernode', [False, True]),
                  ('atomic_number', self.atomic_numbers),
                  ('formal_charge', self.formal_charges)]
        if self.use_chirality:
            blocks.append(('chiral_tag', self.chiral_tags))
        blocks += [('explicit_h_count', self.explicit_h_counts),
                   ('is_aromatic', [False, True]),
                   ('is_edited', [False, True])]
        if self.mark_reactants:
            blocks.append(('is_reactant', [False, True]))
        return blocks

    @property
    def bond_blocks(self) -> List[tuple]:
        blocks = [('bond_type', self.bond_types)]
        if self.use_bond_stereo:
            blocks.append(('bond_stereo', self.bond_stereos))
        blocks.append(('is_edited', [False, True]))
        return blocks

    @property
    def atom_width(self) -> int:
        return sum(len(values) for _, values in self.atom_blocks)

    @property
    def bond_width(self) -> int:
        return sum(len(values) for _, values in self.bond_blocks)

    def validate(self) -> tuple[bool, str]:
        """
        Validate value lists.

        Returns:
            Tuple of (is_valid, error_message)
        """
        for name, values in self.atom_blocks + self.bond_blocks:
            if len(set(map(str, values))) != len(values):
                return False, f"Feature {name} lists a value twice"
        if "supernode" not in self.bond_types or "self" not in self.bond_types:
            return False, "bond_types must include supernode and self"
        return True, ""

    def to_dict(self) -> dict:
        return {
            'atomic_numbers': list(self.atomic_numbers),
            'formal_charges': list(self.formal_charges),
            'chiral_tags': list(self.chiral_tags),
            'explicit_h_counts': list(self.explicit_h_counts),
            'bond_types': list(self.bond_types),
            'bond_stereos': list(self.bond_stereos),
            'use_chirality': self.use_chirality,
            'use_bond_stereo': self.use_bond_stereo,
            'mark_reactants': self.mark_reactants,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'FeatureConfig':
        return cls(**data)

    def save(self, path: Union[str, Path], config_hash: str = "") -> None:
        payload = {'format_version': FEATURE_FORMAT_VERSION, 'config_hash': config_hash, **self.to_dict()}
        Path(path).write_text(json.dumps(payload, indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'FeatureConfig':
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        version = payload.pop('format_version', None)
        if version != FEATURE_FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported feature config version {version}")
        payload.pop('config_hash', None)
        return cls.from_dict(payload)
