"""
Reaction tables (CSV/TSV) in the public USPTO-50k layout.

Usage:
    records = read_reactions("raw_train.csv", split="train")
    for record in records:
        reaction = record.to_reaction(Direction.RETRO)

Recognised columns: `id`, `class` (optional, 1..10), the reaction SMILES under
`rxn`, `rxn_smiles` or `reactants>reagents>production`, and an optional
`split`. The delimiter is taken from the file suffix (.tsv/.txt tab, else comma).
"""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Union

import pandas as pd

from chem.aromaticity import normalize_hydrogens
from chem.molgraph import MolGraph
from chem.smiles_parser import parse_smiles
from oracle.reaction import Direction, Reaction, comparison_smiles, main_component, reaction_from_smiles

from .exceptions import DataError

logger = logging.getLogger(__name__)

RXN_COLUMNS = ("rxn", "rxn_smiles", "reactants>reagents>production")
SPLITS = ("train", "valid", "test")


@dataclass(frozen=True)
class ReactionRecord:
    id: str
    rxn: str
    reaction_class: Optional[int] = None
    split: Optional[str] = None

    def to_reaction(self, direction: Direction) -> Reaction:
        return reaction_from_smiles(self.rxn, direction, self.reaction_class, self.id)

    @property
    def reactants(self) -> str:
        return self.rxn.split(">")[0]

    @property
    def reagents(self) -> str:
        parts = self.rxn.split(">")
        return parts[1] if len(parts) == 3 else ""

    @property
    def product(self) -> str:
        return self.rxn.split(">")[-1]

    def model_input(self, direction: Direction) -> str:
        """Text handed to `predict`: the product for retro, `reactants>reagents` forward."""
        if direction is Direction.RETRO:
            return self.product
        return f"{self.reactants}>{self.reagents}" if self.reagents else self.reactants


def _delimiter(path: Path) -> str:
    return "\t" if path.suffix.lower() in (".tsv", ".txt") else ","


def _strip_extension(rxn: str) -> str:
    # CXSMILES extensions such as ' |f:1.2|' follow a space
    return rxn.strip().split(" ")[0]


def read_table(path: Union[str, Path]) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise DataError("file not found", path)
    try:
        frame = pd.read_csv(path, sep=_delimiter(path), dtype=str, keep_default_na=False, comment=None)
    except pd.errors.EmptyDataError:
        return pd.DataFrame()
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise DataError(f"unreadable table: {exc}", path) from exc
    frame.columns = [c.strip() for c in frame.columns]
    return frame


def _parse_class(value: str, path: Path, row: int) -> Optional[int]:
    value = (value or "").strip()
    if not value:
        return None
    try:
        reaction_class = int(float(value))
    except ValueError:
        raise DataError(f"class '{value}' is not an integer", path, row) from None
    if not 1 <= reaction_class <= 10:
        raise DataError(f"class {reaction_class} outside 1..10", path, row)
    return reaction_class


def read_reactions(path: Union[str, Path], split: Optional[str] = None) -> List[ReactionRecord]:
    """Every row of the table; `split` keeps only rows of that split when the table has a split column."""
    path = Path(path)
    frame = read_table(path)
    if frame.empty:
        logger.warning(f"{path}: no reactions")
        return []
    rxn_column = next((c for c in RXN_COLUMNS if c in frame.columns), None)
    if rxn_column is None:
        raise DataError(f"no reaction column (expected one of {', '.join(RXN_COLUMNS)})", path)

    records = []
    for row, values in enumerate(frame.to_dict('records')):
        record_split = values.get('split') or None
        if split is not None and record_split is not None and record_split != split:
            continue
        record_id = (values.get('id') or "").strip() or str(row)
        records.append(ReactionRecord(id=record_id, rxn=_strip_extension(values[rxn_column]),
                                      reaction_class=_parse_class(values.get('class'), path, row + 2),
                                      split=record_split or split))
    logger.info(f"Read {len(records)} reactions from {path}")
    return records


def ground_truth_key(record: ReactionRecord, direction: Direction) -> str:
    """Map-free canonical form of what a prediction for this record must reproduce."""
    reaction = record.to_reaction(direction)
    if direction is Direction.RETRO:
        return comparison_smiles(reaction.target)
    return comparison_smiles(main_component(reaction.product))


def input_graph(text: str, direction: Direction) -> MolGraph:
    """
    Graph decoding starts from. Forward inputs may be written `reactants>reagents`;
    atoms on the reactant side are then flagged as reactants.
    """
    text = _strip_extension(text)
    if direction is Direction.FORWARD and ">" in text:
        reactants, _, reagents = text.partition(">")
        reagents = reagents.strip(">")
        flagged = normalize_hydrogens(parse_smiles(reactants)).strip_maps()
        flagged = MolGraph(tuple(replace(a, is_reactant=True) for a in flagged.nodes), dict(flagged.edges))
        if not reagents:
            return flagged
        return MolGraph.disjoint_union([flagged, normalize_hydrogens(parse_smiles(reagents)).strip_maps()])
    graph = normalize_hydrogens(parse_smiles(text)).strip_maps()
    if direction is Direction.FORWARD:
        graph = MolGraph(tuple(replace(a, is_reactant=True) for a in graph.nodes), dict(graph.edges))
    return graph


@dataclass(frozen=True)
class ModelInput:
    id: str
    text: str
    reaction_class: Optional[int] = None


def read_model_inputs(path: Union[str, Path], direction: Direction) -> List[ModelInput]:
    """
    Inputs for `predict`. A .csv/.tsv reaction table contributes the side the
    model starts from; a table with a `smiles` column or a plain file with one
    molecule per line (`smiles` or `id<TAB>smiles`) is taken as is.
    """
    path = Path(path)
    if not path.exists():
        raise DataError("file not found", path)
    if path.suffix.lower() in (".csv", ".tsv"):
        frame = read_table(path)
        if frame.empty:
            return []
        if any(c in frame.columns for c in RXN_COLUMNS):
            return [ModelInput(r.id, r.model_input(direction), r.reaction_class) for r in read_reactions(path)]
        if 'smiles' not in frame.columns:
            raise DataError("no `smiles` or reaction column", path)
        return [ModelInput((values.get('id') or "").strip() or str(row), _strip_extension(values['smiles']),
                           _parse_class(values.get('class'), path, row + 2))
                for row, values in enumerate(frame.to_dict('records'))]

    inputs = []
    for row, line in enumerate(path.read_text(encoding="utf-8").splitlines()):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        reaction_id, _, smiles = line.rpartition("\t")
        inputs.append(ModelInput(reaction_id.strip() or str(row), smiles.strip()))
    return inputs
