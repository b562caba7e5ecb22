"""Decoder-only character-level transformer with learned positions."""

from __future__ import annotations

import torch
from torch import nn

from rewritetrainer.vocab import VOCAB_SIZE


class Block(nn.Module):
    def __init__(self, hidden: int, heads: int):
        super().__init__()
        self.ln1 = nn.LayerNorm(hidden)
        self.attn = nn.MultiheadAttention(hidden, heads, batch_first=True)
        self.ln2 = nn.LayerNorm(hidden)
        self.mlp = nn.Sequential(
            nn.Linear(hidden, 4 * hidden),
            nn.GELU(),
            nn.Linear(4 * hidden, hidden),
        )

    def forward(self, x: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        h = self.ln1(x)
        attn_out, _ = self.attn(h, h, h, attn_mask=mask, need_weights=False)
        x = x + attn_out
        return x + self.mlp(self.ln2(x))


class CharTransformer(nn.Module):
    """Pre-norm GPT-style decoder over the fixed rewrite vocabulary."""

    def __init__(self, layers: int, heads: int, hidden: int, max_len: int):
        super().__init__()
        self.max_len = max_len
        self.token_emb = nn.Embedding(VOCAB_SIZE, hidden)
        self.pos_emb = nn.Embedding(max_len, hidden)
        self.blocks = nn.ModuleList(Block(hidden, heads) for _ in range(layers))
        self.ln_f = nn.LayerNorm(hidden)
        self.head = nn.Linear(hidden, VOCAB_SIZE)
        nn.init.normal_(self.token_emb.weight, std=0.02)
        nn.init.normal_(self.pos_emb.weight, std=0.02)

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        batch, length = tokens.shape
        if length > self.max_len:
            raise ValueError(f"sequence length {length} exceeds max_len {self.max_len}")
        positions = torch.arange(length, device=tokens.device)
        x = self.token_emb(tokens) + self.pos_emb(positions)[None, :, :]
        mask = torch.triu(
            torch.ones(length, length, dtype=torch.bool, device=tokens.device), diagonal=1
        )
        for block in self.blocks:
            x = block(x, mask)
        return self.head(self.ln_f(x))

    @torch.no_grad()
    def greedy_complete(self, prompts: torch.Tensor, max_new: int, eos_id: int) -> list[list[int]]:
        """Greedy decoding of a batch of equal-length prompts until <EOS>."""
        self.eval()
        tokens = prompts.clone()
        batch = tokens.shape[0]
        done = torch.zeros(batch, dtype=torch.bool, device=tokens.device)
        generated: list[list[int]] = [[] for _ in range(batch)]
        for _ in range(max_new):
            if tokens.shape[1] > self.max_len:
                break
            logits = self(tokens)[:, -1, :]
            nxt = logits.argmax(dim=-1)
            for row in range(batch):
                if not done[row]:
                    token = int(nxt[row])
                    if token == eos_id:
                        done[row] = True
                    else:
                        generated[row].append(token)
            if bool(done.all()):
                break
            tokens = torch.cat([tokens, nxt[:, None]], dim=1)
        return generated
