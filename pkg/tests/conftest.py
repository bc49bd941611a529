from __future__ import annotations

import numpy as np
import pytest

from visquant import Catalog, Corpus, SynthConfig, generate_corpus, synth_embeddings


SMALL_WORLD = SynthConfig(objects=24, properties=10, mean_plausible=5.0, dim=8, sigma=0.1, slots=8)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def catalog() -> Catalog:
    return Catalog.synthetic(objects=24, properties=10, mean_plausible=5.0, seed=3)


@pytest.fixture(scope="session")
def corpus(catalog: Catalog) -> Corpus:
    return generate_corpus(24, catalog, SMALL_WORLD, seed=5)


@pytest.fixture(scope="session")
def tables(catalog: Catalog):
    return synth_embeddings(catalog, SMALL_WORLD.dim, SMALL_WORLD.sigma, seed=5)


@pytest.fixture(scope="session")
def world() -> SynthConfig:
    return SMALL_WORLD
