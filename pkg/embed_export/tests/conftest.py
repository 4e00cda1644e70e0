import pytest

# Minimal WordPiece vocabulary; enough to tokenize the test queries.
VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "the", "a", "cat", "dog", "sat", "ran", "mat", "sun", "moon",
    "blue", "red", "fast", "slow", "query", "test", "ocean", "tide",
    "##s", "##ing", "##ed",
]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A real SentenceTransformer, built locally so no hub access is needed.

    One-layer BERT, hidden size 32, mean pooling. Weights are seeded but
    arbitrary; tests only rely on shapes, ordering, and determinism."""
    torch = pytest.importorskip("torch")
    transformers = pytest.importorskip("transformers")
    st_models = pytest.importorskip("sentence_transformers.models")
    from sentence_transformers import SentenceTransformer

    root = tmp_path_factory.mktemp("tiny-encoder")
    hf_dir = root / "hf"
    hf_dir.mkdir()
    (hf_dir / "vocab.txt").write_text("\n".join(VOCAB) + "\n", encoding="utf-8")

    torch.manual_seed(0)
    config = transformers.BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=32,
        num_hidden_layers=1,
        num_attention_heads=2,
        intermediate_size=37,
        max_position_embeddings=64,
    )
    transformers.BertModel(config).save_pretrained(hf_dir)
    tokenizer = transformers.BertTokenizer(str(hf_dir / "vocab.txt"), do_lower_case=True)
    tokenizer.save_pretrained(hf_dir)

    word = st_models.Transformer(str(hf_dir))
    word_dim = getattr(word, "get_embedding_dimension", word.get_word_embedding_dimension)()
    pooling = st_models.Pooling(word_dim, pooling_mode="mean")
    model = SentenceTransformer(modules=[word, pooling])
    out = root / "encoder"
    model.save(str(out))
    return str(out)


@pytest.fixture()
def queries_file(tmp_path):
    path = tmp_path / "queries.tsv"
    lines = [
        "q01\tthe cat sat",
        "q02\tocean tide",
        "q03\tfast red dog",
        "q04\t",
        "q05\tblue moon",
        "q06\tslow query",
        "q07\tthe sun",
        "q08\ttest the mat",
        "q09\tdog ran fast",
        "q10\tcat and unseen tokens",
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
