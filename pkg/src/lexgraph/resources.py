"""Access to the data files shipped with the package."""

import json
from functools import lru_cache
from importlib import resources


def _data_path(name: str):
    return resources.files("lexgraph") / "data" / name


def read_data_text(name: str) -> str:
    return _data_path(name).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def default_stopwords() -> frozenset[str]:
    words = read_data_text("stopwords.txt").split()
    return frozenset(words)


def default_lawpoints() -> dict[str, list[str]]:
    return json.loads(read_data_text("lawpoints.json"))


def default_aliases() -> dict[str, str]:
    return json.loads(read_data_text("aliases.json"))


def default_ontology() -> dict:
    return json.loads(read_data_text("ontology.json"))


def feature_spec_json(n_features: int) -> list[dict]:
    if n_features not in (13, 27):
        raise ValueError(f"no bundled feature spec with {n_features} features")
    return json.loads(read_data_text(f"feature_spec_{n_features}.json"))


def mini_corpus_path():
    return _data_path("mini_corpus.jsonl")


def golden_path(name: str):
    return _data_path("golden") / name
