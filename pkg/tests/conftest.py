import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import build_toy_artifacts, data_path  # noqa: E402


@pytest.fixture(scope="session")
def toy_artifacts(tmp_path_factory):
    return build_toy_artifacts(tmp_path_factory.mktemp("toy"))


@pytest.fixture(scope="session")
def toy_paths(tmp_path_factory):
    """Toy artifacts written to disk, for CLI/service tests."""
    from convqa.pipeline import ArtifactPaths
    from convqa.retrieval import save_index
    from convqa.wpn import save_wpn
    from convqa import corpus as corpus_mod
    from convqa.retrieval import build_index
    from convqa.wpn import build_wpn

    tmp = tmp_path_factory.mktemp("toy_disk")
    store = corpus_mod.ingest(data_path("batman_corpus.tsv"), tmp / "corpus", fmt="tsv")
    save_index(build_index(store), tmp / "index.bin")
    save_wpn(build_wpn(store, window=3), tmp / "wpn.bin")
    return ArtifactPaths(
        corpus=str(tmp / "corpus"),
        index=str(tmp / "index.bin"),
        wpn=str(tmp / "wpn.bin"),
        embeddings=data_path("toy_embeddings.txt"),
    )
