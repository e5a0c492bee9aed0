"""
Shared fixtures: a handful of mapped reactions, their ground-truth sequences
and a tiny float64 network built on top of them.
"""

import logging

import pytest

from config.model_config import ModelConfig
from data.smoke_dataset import smoke_reactions
from features.featurizer import fit_config
from model.megan import MeganModel
from oracle.ordering import OrderingPolicy
from oracle.reaction import Direction, reaction_from_smiles
from oracle.sequence import generate_sequence
from oracle.vocab_builder import build_vocab

ESTER = "[CH3:1][C:2](=[O:3])[OH:4].[CH3:5][OH:6]>>[CH3:1][C:2](=[O:3])[O:6][CH3:5]"
AMIDE = "[CH3:1][C:2](=[O:3])[Cl:4].[CH3:5][NH2:6]>>[CH3:1][C:2](=[O:3])[NH:6][CH3:5]"


@pytest.fixture(autouse=True)
def quiet_logging(caplog):
    caplog.set_level(logging.WARNING)


@pytest.fixture(scope="session")
def smoke_frame():
    return smoke_reactions(seed=0, size=40)


@pytest.fixture(scope="session")
def ester_sample():
    return generate_sequence(reaction_from_smiles(ESTER, Direction.RETRO, 2, "ester"), OrderingPolicy())


@pytest.fixture(scope="session")
def samples(smoke_frame):
    reactions = [reaction_from_smiles(ESTER, Direction.RETRO, 2, "ester"),
                 reaction_from_smiles(AMIDE, Direction.RETRO, 2, "amide")]
    reactions += [reaction_from_smiles(row['rxn'], Direction.RETRO, int(row['class']), row['id'])
                  for row in smoke_frame.head(8).to_dict('records')]
    return [generate_sequence(r, OrderingPolicy()) for r in reactions]


@pytest.fixture(scope="session")
def vocab(samples):
    return build_vocab(samples)


@pytest.fixture(scope="session")
def feature_cfg(samples):
    return fit_config(samples)


@pytest.fixture
def tiny_model(vocab, feature_cfg):
    return MeganModel.create(ModelConfig.tiny(), vocab, feature_cfg, seed=0)
