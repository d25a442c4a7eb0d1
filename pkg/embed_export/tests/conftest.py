import json

import pytest
import torch
from tokenizers import Tokenizer
from tokenizers.models import WordLevel
from tokenizers.pre_tokenizers import Whitespace
from transformers import PreTrainedTokenizerFast, XLMRobertaConfig, XLMRobertaModel

WORDS = [
    "hello", "world", "btc", "up", "down", "moon", "bear", "bull",
    "buy", "sell", "hold", "now", "<url>", "<user>", "<hashtag>",
    "\U0001F680", "\U0001F525", "\U0001F43B", "\U0001F48E",
]


@pytest.fixture(scope="session")
def tiny_encoder(tmp_path_factory):
    """A pinned local encoder directory: tiny randomly initialized weights
    with a fixed seed, word-level tokenizer. Stands in for the real
    multilingual encoder so tests run offline and deterministically."""
    outdir = tmp_path_factory.mktemp("tiny-encoder")
    vocab = {"<s>": 0, "</s>": 1, "<unk>": 2, "<pad>": 3}
    for word in WORDS:
        vocab[word] = len(vocab)
    tokenizer = Tokenizer(WordLevel(vocab, unk_token="<unk>"))
    tokenizer.pre_tokenizer = Whitespace()
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tokenizer,
        unk_token="<unk>",
        pad_token="<pad>",
        bos_token="<s>",
        eos_token="</s>",
        model_max_length=64,
    )
    config = XLMRobertaConfig(
        vocab_size=len(vocab),
        hidden_size=16,
        num_hidden_layers=1,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=80,
        pad_token_id=3,
    )
    torch.manual_seed(1234)
    model = XLMRobertaModel(config)
    model.save_pretrained(outdir)
    fast.save_pretrained(outdir)
    return str(outdir)


def write_posts(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
