"""Freeze reference outputs for the C++ encoder and tokenizer tests.

Builds a tiny randomly initialised DistilBERT with transformers/torch, saves
its weights and vocabulary, and records eval logits, full-parameter gradients
of the cross-entropy loss (dropout disabled), one AdamW step, and BERT
tokenizer output for a handful of strings.

    python3 tools/oracles/make_encoder_fixture.py tests/fixtures/distilbert_tiny
"""

import json
import pathlib
import sys

import torch
from safetensors.torch import save_file
from transformers import BertTokenizer, DistilBertConfig, DistilBertForSequenceClassification

WORDS = [
    "weekend", "plans", "cancel", "got", "the", "news", "sarcasm", "great", "just",
    "wow", "monday", "love", "हो", "गए", "है", "नहीं", "yaar", "kya", "cafe",
    "un", "##able", "##s", "##ed", "##ing",
]

TEXTS = [
    "Weekend plans cancel हो गए",
    "Wow, I just LOVE Mondays!!!",
    "Café naïve résumé",
    "yaar\tkya scene hai...",
    "Unable to decide 😂 ok",
    "漢字 mixed with text",
    "ctrl\u0007char and zero​width",
    "",
    "a" * 120,
    "नहीं है",
]


def build_vocab():
    tokens = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    chars = sorted(set("abcdefghijklmnopqrstuvwxyz0123456789.,!?'") | set("होगएहैनहीं"))
    tokens += chars + ["##" + c for c in chars] + WORDS
    seen, out = set(), []
    for t in tokens:
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def main(out_dir):
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(1234)
    vocab = build_vocab()
    (out / "vocab.txt").write_text("".join(t + "\n" for t in vocab), encoding="utf-8")

    cfg = DistilBertConfig(
        vocab_size=len(vocab), dim=8, n_layers=2, n_heads=2, hidden_dim=16,
        max_position_embeddings=16, dropout=0.0, attention_dropout=0.0,
        seq_classif_dropout=0.0, num_labels=3, pad_token_id=0,
        attn_implementation="eager", initializer_range=0.3,
    )
    model = DistilBertForSequenceClassification(cfg)
    # Non-trivial LayerNorm parameters so their gradients are exercised.
    with torch.no_grad():
        for name, p in model.named_parameters():
            if "LayerNorm" in name or "layer_norm" in name:
                p.add_(0.1 * torch.randn_like(p))
            elif name.endswith("bias"):
                p.copy_(0.05 * torch.randn_like(p))
    state = {k: v.contiguous() for k, v in model.state_dict().items() if v.dtype.is_floating_point}
    save_file(state, str(out / "model.safetensors"))
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True), encoding="utf-8")

    ids = torch.tensor([[2, 10, 25, 7, 3, 0, 0], [2, 14, 30, 31, 32, 33, 3]])
    mask = (ids != 0).long()
    labels = torch.tensor([2, 0])

    model.eval()
    with torch.no_grad():
        eval_logits = model(input_ids=ids, attention_mask=mask).logits

    model.train()
    model.zero_grad()
    logits = model(input_ids=ids, attention_mask=mask).logits
    loss = torch.nn.functional.cross_entropy(logits, labels)
    loss.backward()
    grads = {n: p.grad.flatten().tolist() for n, p in model.named_parameters()}

    opt = torch.optim.AdamW(model.parameters(), lr=1e-3, weight_decay=0.01)
    opt.step()
    after = {n: p.detach().flatten().tolist() for n, p in model.named_parameters()}

    tok = BertTokenizer(str(out / "vocab.txt"), do_lower_case=True)
    tokenizer_cases = []
    for text in TEXTS:
        tokenizer_cases.append({
            "text": text,
            "tokens": tok.tokenize(text),
            "ids": tok(text, truncation=True, max_length=8)["input_ids"],
        })

    oracle = {
        "ids": ids.tolist(),
        "mask": mask.tolist(),
        "labels": labels.tolist(),
        "eval_logits": eval_logits.flatten().tolist(),
        "loss": loss.item(),
        "grads": grads,
        "after_adamw": after,
        "tokenizer": tokenizer_cases,
    }
    (out / "oracle.json").write_text(json.dumps(oracle, ensure_ascii=False), encoding="utf-8")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/distilbert_tiny")
