#!/usr/bin/env python3
"""Deterministically (re)build the synthetic fixture dataset under fixtures/.

The dataset is engineered so the whole pipeline runs offline with known
structure:

- a 200-word passage whose default construction (lead 16, interval 5) yields
  37 gaps at positions 17, 22, ..., 197;
- 24 student response sheets where exactly the odd-numbered gaps (19 of 37)
  collect more than 10 distinct answers and therefore survive the filter;
- a planted per-gap quality ordering over candidates; 12 judge sessions are
  noisy permutations of it;
- three toy embedding models: model_a encodes the planted quality exactly,
  model_b adds mild noise, model_c adds heavy noise, so model_a must win the
  consensus correlation.

Every random draw is seeded; rerunning the script reproduces the files
byte for byte.
"""

from __future__ import annotations

import csv
import math
import random
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from clozeval import (  # noqa: E402
    JudgeSession,
    RankingTable,
    collect_candidates,
    filter_gaps,
    generate_cloze,
    parse_responses,
    parse_test_file,
    write_test_file,
)

FIXTURES = REPO / "fixtures"

TITLE = "A horta da escola"
TEST_ID = "horta-escola"
LEAD_LEN = 16
INTERVAL = 5
N_WORDS = 200
N_STUDENTS = 24
N_JUDGES = 12
DIM = 8

# One expected word per gap, positions 17, 22, ..., 197.
EXPECTED_WORDS = [
    "telefone", "escola", "jardim", "livro", "janela", "porta", "mesa",
    "cadeira", "caderno", "lápis", "papel", "música", "amigo", "cidade",
    "estrada", "floresta", "montanha", "rio", "ponte", "mercado", "padaria",
    "farinha", "açúcar", "leite", "queijo", "manhã", "tarde", "noite",
    "semana", "inverno", "verão", "chuva", "vento", "nuvem", "estrela",
    "barco", "peixe",
]

# Shared candidate pool, disjoint from the expected words; the list order
# defines the planted quality (earlier = better substitute).
POOL_WORDS = [
    "casa", "lar", "prédio", "apartamento", "cabana", "castelo", "palácio",
    "abrigo", "telhado", "parede", "quarto", "sala", "cozinha", "quintal",
    "muro", "cerca", "campo", "praia", "lago", "mar", "ilha", "deserto",
    "caverna", "trilha", "caminho", "avenida", "praça", "parque", "bosque",
    "pomar", "horta", "celeiro", "fazenda", "sítio", "vila", "aldeia",
]

FILLER_WORDS = [
    "os", "alunos", "plantam", "sementes", "durante", "aquela", "primavera",
    "enquanto", "todo", "grupo", "observa", "com", "atenção", "cada",
    "etapa", "do", "trabalho", "as", "crianças", "regam", "uma", "fileira",
    "depois", "conversam", "sobre", "o", "crescimento", "das", "plantas",
    "novas", "alguém", "anota", "tudo", "num", "velho",
]

SENTENCE_LENGTHS = [9, 11, 8, 12, 10, 7, 13]

RICH_SIZES = [12, 11, 13]     # distinct answers at rich gaps (all > 10)
POOR_SIZES = [5, 7, 4, 8, 6]  # distinct answers at poor gaps (<= 10 with specials)


def planted_quality() -> dict[str, float]:
    """Global substitute quality for pool words: strictly decreasing, distinct."""
    n = len(POOL_WORDS)
    return {w: 0.93 - i * (0.88 / n) for i, w in enumerate(POOL_WORDS)}


def build_passage() -> str:
    gap_positions = set(range(LEAD_LEN + 1, N_WORDS + 1, INTERVAL))
    expected_at = dict(zip(sorted(gap_positions), EXPECTED_WORDS))
    tokens: list[str] = []
    filler_i = 0
    for pos in range(1, N_WORDS + 1):
        if pos in gap_positions:
            tokens.append(expected_at[pos])
        else:
            tokens.append(FILLER_WORDS[filler_i % len(FILLER_WORDS)])
            filler_i += 1
    # Sentence punctuation and capitalization.
    boundaries = []
    acc = 0
    for i in range(N_WORDS):
        acc = acc + 1
        if acc >= SENTENCE_LENGTHS[len(boundaries) % len(SENTENCE_LENGTHS)] and i < N_WORDS - 1:
            boundaries.append(i)
            acc = 0
    boundaries.append(N_WORDS - 1)
    for b in boundaries:
        tokens[b] = tokens[b] + "."
    starts = [0] + [b + 1 for b in boundaries[:-1]]
    for s in starts:
        tokens[s] = tokens[s][0].upper() + tokens[s][1:]
    return " ".join(tokens)


def build_responses(
    rng: random.Random,
) -> tuple[list[tuple[str, int, str]], dict[int, list[str]]]:
    """CSV rows (student_id, gap_id, answer) plus the per-gap answer pools."""
    quality = planted_quality()
    rows: list[tuple[str, int, str]] = []
    rich_i = poor_i = 0
    special_cycle = ["typo", "multiword", "omit"]
    gap_pools: dict[int, list[str]] = {}
    for gap_id in range(1, 38):
        expected = EXPECTED_WORDS[gap_id - 1]
        if gap_id % 2 == 1:  # rich gap
            size = RICH_SIZES[rich_i % len(RICH_SIZES)]
            rich_i += 1
            pool_words = rng.sample(POOL_WORDS, size - 1)
            gap_pools[gap_id] = [expected] + sorted(pool_words, key=lambda w: -quality[w])
        else:
            size = POOR_SIZES[poor_i % len(POOR_SIZES)]
            poor_i += 1
            pool_words = rng.sample(POOL_WORDS, size)
            gap_pools[gap_id] = sorted(pool_words, key=lambda w: -quality[w])

    for student_i in range(N_STUDENTS):
        sid = f"s{student_i + 1:02d}"
        for gap_id in range(1, 38):
            pool = gap_pools[gap_id]
            if gap_id % 2 == 1:
                answer = pool[(student_i + gap_id) % len(pool)]
                # Raw-form decorations; all normalize back to the pool word.
                if student_i == 2:
                    answer = answer[0].upper() + answer[1:]
                elif student_i == 7:
                    answer = answer + "."
                elif student_i == 11:
                    answer = f" {answer} "
                elif student_i == 19:
                    answer = answer + ","
                rows.append((sid, gap_id, answer))
            else:
                if student_i == 22:
                    rows.append((sid, gap_id, ""))  # explicit blank
                    continue
                if student_i == 23:
                    special = special_cycle[(gap_id // 2 - 1) % len(special_cycle)]
                    if special == "typo":
                        rows.append((sid, gap_id, EXPECTED_WORDS[gap_id - 1] + "zz"))
                    elif special == "multiword":
                        rows.append((sid, gap_id, "muito grande"))
                    # "omit": no row at all; reads back as blank
                    continue
                answer = pool[(student_i + gap_id) % len(pool)]
                rows.append((sid, gap_id, answer))
    return rows, gap_pools


def unit_tail(rng: random.Random) -> list[float]:
    """Random unit vector in the DIM-1 dimensional tail (dims 2..DIM)."""
    while True:
        v = [rng.gauss(0.0, 1.0) for _ in range(DIM - 1)]
        norm = math.sqrt(sum(x * x for x in v))
        if norm > 1e-6:
            return [x / norm for x in v]


def build_models(tie_pair: tuple[str, str]) -> dict[str, list[str]]:
    """Rows for the three toy models; cos(expected, w) equals each model's quality.

    In model_c the tie_pair words share one vector, planting an exact cosine
    tie that exercises midranks all the way through the pipeline.
    """
    quality = planted_quality()
    tail_rng = random.Random(515)
    tails = {w: unit_tail(tail_rng) for w in POOL_WORDS + ["muito", "grande"]}

    base_quality = dict(quality)
    base_quality["muito"] = 0.30
    base_quality["grande"] = 0.25

    def rows_for(noise_sigma: float, seed: int, with_tie: bool = False) -> list[str]:
        rng = random.Random(seed)
        qualities = {}
        for word in POOL_WORDS + ["muito", "grande"]:
            q = base_quality[word]
            if noise_sigma > 0:
                q = min(0.985, max(0.02, q + rng.gauss(0.0, noise_sigma)))
            qualities[word] = q
        if with_tie:
            # Both words sit below the noise floor (0.02), so they tie at the
            # bottom two ranks of every gap holding both of them.
            qualities[tie_pair[0]] = qualities[tie_pair[1]] = 0.015
        vectors = {}
        for word in POOL_WORDS + ["muito", "grande"]:
            q = qualities[word]
            scale = math.sqrt(1.0 - q * q)
            vectors[word] = [q] + [scale * t for t in tails[word]]
        if with_tie:
            vectors[tie_pair[1]] = vectors[tie_pair[0]]
        rows = []
        for word in EXPECTED_WORDS:
            vec = [1.0] + [0.0] * (DIM - 1)
            rows.append(word + " " + " ".join(repr(c) for c in vec))
        for word in POOL_WORDS + ["muito", "grande"]:
            rows.append(word + " " + " ".join(repr(c) for c in vectors[word]))
        return rows

    return {
        "model_a": rows_for(0.0, 0),
        "model_b": rows_for(0.05, 101),
        "model_c": rows_for(0.15, 202, with_tie=True),
    }


def build_judges(test, sheets, rng: random.Random) -> list[JudgeSession]:
    quality = planted_quality()
    selected = filter_gaps(test, sheets, 10)
    planted: dict[int, list[str]] = {}
    for gap_id in selected:
        candidates = collect_candidates(test, sheets, gap_id)
        expected = test.gap(gap_id).expected
        planted[gap_id] = sorted(
            candidates, key=lambda c: -(1.0 if c == expected else quality[c])
        )
    sessions = []
    for judge_i in range(N_JUDGES):
        judge_id = f"J{judge_i + 1:02d}"
        rankings: dict[int, RankingTable] = {}
        submitted_at: dict[int, str] = {}
        for task_i, gap_id in enumerate(selected):
            order = list(planted[gap_id])
            for _ in range(rng.randint(2, 5)):
                k = rng.randrange(len(order) - 1)
                order[k], order[k + 1] = order[k + 1], order[k]
            entries = tuple((c, float(i + 1)) for i, c in enumerate(order))
            rankings[gap_id] = RankingTable(
                gap_id=gap_id, ranker_id=judge_id, entries=entries
            )
            submitted_at[gap_id] = f"2025-03-01T09:{task_i:02d}:00+00:00"
        sessions.append(
            JudgeSession(
                session_id=f"session_{judge_id}",
                judge_id=judge_id,
                rankings=rankings,
                submitted_at=submitted_at,
                complete=True,
            )
        )
    return sessions


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)
    (FIXTURES / "models").mkdir(exist_ok=True)
    (FIXTURES / "judges").mkdir(exist_ok=True)

    passage = build_passage()
    (FIXTURES / "passage.txt").write_text(passage + "\n", encoding="utf-8")

    test = generate_cloze(
        passage, lead_len=LEAD_LEN, interval=INTERVAL, test_id=TEST_ID, title=TITLE
    )
    assert len(test.gaps) == 37, f"expected 37 gaps, got {len(test.gaps)}"
    assert [g.expected for g in test.gaps] == EXPECTED_WORDS
    write_test_file(test, FIXTURES / "test.json")

    rows, gap_pools = build_responses(random.Random(11))
    with (FIXTURES / "responses.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["student_id", "gap_id", "answer"])
        writer.writerows(rows)

    # model_c ties the two weakest candidates of gap 1. Placed at the tail on
    # purpose: gap sizes vary, so tail ranks are not present in every table
    # and the tie shifts the pooled rank sums, keeping the ranker ANOVA away
    # from the structural F=0 of all-strict same-size rankings.
    rich_pool = gap_pools[1][1:]
    tie_pair = (rich_pool[-2], rich_pool[-1])

    test = parse_test_file(FIXTURES / "test.json")
    sheets = parse_responses(FIXTURES / "responses.csv", test)
    assert len(sheets) == 24
    selected = filter_gaps(test, sheets, 10)
    assert selected == [g for g in range(1, 38) if g % 2 == 1], selected

    models = build_models(tie_pair)
    for name, model_rows in models.items():
        path = FIXTURES / "models" / f"{name}.txt"
        if name == "model_b":  # word2vec-text layout: count/dimension header
            content = f"{len(model_rows)} {DIM}\n" + "\n".join(model_rows) + "\n"
        else:  # glove-text layout: rows only
            content = "\n".join(model_rows) + "\n"
            if name == "model_c":  # a duplicate row; loaders keep the last one
                content += model_rows[len(EXPECTED_WORDS)] + "\n"
        path.write_text(content, encoding="utf-8")

    for session in build_judges(test, sheets, random.Random(7)):
        session.write_json(FIXTURES / "judges" / f"session_{session.judge_id}.json")

    (FIXTURES / "config.json").write_text(
        '{\n  "lead": 16,\n  "interval": 5,\n  "min_alternatives": 10\n}\n',
        encoding="utf-8",
    )
    print(f"fixtures written to {FIXTURES}")
    print(f"gaps: {len(test.gaps)}, selected: {len(selected)}, students: {len(sheets)}")


if __name__ == "__main__":
    main()
