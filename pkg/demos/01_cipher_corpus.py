"""Walk through the data: rot13 pairing, the four noise operators, a corpus.

Run:  python3 demos/01_cipher_corpus.py
"""

import random

from causalmdl import (
    CipherDatasetSpec,
    NoiseKind,
    NoiseSpec,
    TokenizeMode,
    apply_noise,
    generate_cipher_dataset,
    rot13,
    synthetic_lines,
)

line = synthetic_lines(1, seed=11)[0]
print("clean English :", line)
print("rot13 cipher  :", rot13(line))
print()

print("Each noise operator alone, at an exaggerated p = 0.3:")
for kind in NoiseKind:
    spec = NoiseSpec(p=0.3, enabled=frozenset({kind}))
    noisy = "".join(apply_noise(list(rot13(line)), spec, random.Random(4)))
    print(f"  {kind.value:10s}: {noisy}")
print()

spec = CipherDatasetSpec(lines=tuple(synthetic_lines(1000, seed=11)),
                         noise=NoiseSpec(p=0.05, rng_seed=11),
                         mode=TokenizeMode.CHAR)
corpus = generate_cipher_dataset(spec)
changed = sum(p.tgt.raw != rot13(p.src.raw) for p in corpus.pairs)
print(f"corpus '{corpus.name}': {len(corpus)} pairs, "
      f"src vocab {corpus.src_vocab.size}, tgt vocab {corpus.tgt_vocab.size}")
print(f"at p = 0.05, noise touched {changed}/{len(corpus)} target lines")
print()
print("three sample pairs:")
for pair in corpus.pairs[:3]:
    print("  X:", pair.src.raw)
    print("  Y:", pair.tgt.raw)
