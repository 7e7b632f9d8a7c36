#!/usr/bin/env python3
"""Independent reference trace of the linking pipeline.

Re-derives, without sharing any code with the Rust crates, the golden
prediction file and the dataset statistics for the bundled fixtures:

    python3 tools/reference_trace.py crates/core/tests/fixtures

writes `golden_predictions.jsonl` and `mini_corpus_stats.json` next to the
inputs. Context scores use dense term-weight vectors over the union
vocabulary; graph scores use an explicit loop over every candidate pair.
Default configuration: lambda=0.5, nil_threshold=0.05, all filters on.
"""

import json
import math
import sys
import unicodedata
from pathlib import Path

LAMBDA = 0.5
TAU = 0.05


def is_arabic_script(c):
    o = ord(c)
    return (0x0600 <= o <= 0x06FF or 0x0750 <= o <= 0x077F or 0x08A0 <= o <= 0x08FF
            or 0xFB50 <= o <= 0xFDFF or 0xFE70 <= o <= 0xFEFF)


def normalize(s):
    s = unicodedata.normalize("NFC", s)
    s = s.replace("ك", "ک").replace("ي", "ی")
    s = "".join(c for c in s if not (c == "ـ" or c == "‌" or 0x064B <= ord(c) <= 0x0652))
    s = " ".join(s.split())
    s = "".join(c if is_arabic_script(c) else c.lower() for c in s)
    return unicodedata.normalize("NFC", s)


def is_word(c):
    o = ord(c)
    return (c.isalnum() or c in "‌‍ـ" or 0x0300 <= o <= 0x036F
            or 0x0610 <= o <= 0x061A or 0x064B <= o <= 0x065F or o == 0x0670
            or 0x06D6 <= o <= 0x06ED)


def tokenize(s):
    toks, i = [], 0
    while i < len(s):
        if not is_word(s[i]):
            i += 1
            continue
        j = i
        while j < len(s) and is_word(s[j]):
            j += 1
        t = normalize(s[i:j])
        if t:
            toks.append((t, i, j))
        i = j
    return toks


def load(fixtures):
    kb = {}
    for line in (fixtures / "mini_kb.jsonl").read_text(encoding="utf-8").splitlines():
        if line.strip():
            r = json.loads(line)
            kb[r["id"]] = r
    for r in kb.values():
        r["links"] = [l for l in r.get("links", []) if l in kb and l != r["id"]]
    lists = json.loads((fixtures / "mini_lists.json").read_text(encoding="utf-8"))
    lists["stopwords"] = {normalize(w) for w in lists["stopwords"]}
    for cf in lists["class_filters"].values():
        cf["triggers"] = {normalize(t) for t in cf["triggers"]}
    docs = [json.loads(l) for l in (fixtures / "mini_corpus.jsonl").read_text(encoding="utf-8").splitlines() if l.strip()]
    return kb, lists, docs


def build_aliases(kb):
    aliases = {}
    for r in kb.values():
        for label in [r["label"]] + r.get("variants", []):
            aliases.setdefault(normalize(label), set()).add(r["id"])
    return aliases


def article_bags(kb, stop):
    bags = {}
    for r in kb.values():
        if r.get("article", "").strip():
            bag = {}
            for t, _, _ in tokenize(r["article"]):
                if t not in stop:
                    bag[t] = bag.get(t, 0) + 1
            bags[r["id"]] = bag
    df = {}
    for bag in bags.values():
        for t in bag:
            df[t] = df.get(t, 0) + 1
    return bags, df, len(bags)


def linked(kb, a, b):
    return b in kb[a]["links"] or a in kb[b]["links"]


def dense_cosine(q, d, df, n):
    vocab = sorted(set(q) | set(d))
    idf = [math.log((1 + n) / (1 + df.get(t, 0))) + 1 for t in vocab]
    qv = [q.get(t, 0) * w for t, w in zip(vocab, idf)]
    dv = [d.get(t, 0) * w for t, w in zip(vocab, idf)]
    nq = math.sqrt(sum(x * x for x in qv))
    nd = math.sqrt(sum(x * x for x in dv))
    if nq == 0 or nd == 0:
        return 0.0
    return min(1.0, sum(a * b for a, b in zip(qv, dv)) / (nq * nd))


def trace(kb, lists, docs):
    aliases = build_aliases(kb)
    stop = lists["stopwords"]
    bags, df, n = article_bags(kb, stop)
    out = []
    for doc in docs:
        toks = tokenize(doc["text"])
        doc_terms = {t for t, _, _ in toks if t not in stop}
        kept_all, pen_all = [], []
        for m in doc["mentions"]:
            cands = sorted(aliases.get(normalize(m["surface"]), set()))
            kept, pen = [], {}
            for c in cands:
                e = kb[c]
                nt = m.get("ner_type")
                if nt and nt in lists["type_mapping"] and e["class"] not in lists["type_mapping"][nt]:
                    continue
                pt = m.get("pos")
                ep = e.get("pos", "UNKNOWN")
                if pt and pt != "UNKNOWN" and ep != "UNKNOWN" and ep != pt:
                    continue
                if c in lists["rare_blocklist"] or e.get("rare", False):
                    continue
                cf = lists["class_filters"].get(e["class"])
                if cf and not (cf["triggers"] & doc_terms):
                    pen[c] = cf["penalty"]
                kept.append(c)
            kept_all.append(kept)
            pen_all.append(pen)
        mentions = []
        for i, m in enumerate(doc["mentions"]):
            ctx = {}
            for t, s, e in toks:
                if s < m["end"] and m["start"] < e:
                    continue
                if t not in stop:
                    ctx[t] = ctx.get(t, 0) + 1
            raw = {}
            for c in kept_all[i]:
                linked_to = set()
                for j, others in enumerate(kept_all):
                    if j == i:
                        continue
                    for o in others:
                        if linked(kb, c, o):
                            linked_to.add(o)
                raw[c] = len(linked_to)
            mx = max(raw.values(), default=0)
            scored = []
            for c in kept_all[i]:
                cs = dense_cosine(ctx, bags[c], df, n) if c in bags else 0.0
                gs = raw[c] / mx if mx else 0.0
                p = pen_all[i].get(c, 1.0)
                scored.append((c, p * (LAMBDA * cs + (1 - LAMBDA) * gs)))
            scored.sort(key=lambda x: (-x[1], x[0]))
            if scored and scored[0][1] >= TAU:
                pred, score, amb = scored[0][0], scored[0][1], scored[1:]
            else:
                pred, score, amb = "NIL", (scored[0][1] if scored else 0.0), scored
            rec = {"start": m["start"], "end": m["end"], "surface": m["surface"]}
            if "ner_type" in m:
                rec["ner_type"] = m["ner_type"]
            if "pos" in m:
                rec["pos"] = m["pos"]
            rec.update(prediction=pred, score=score, ambiguity=[{"id": c, "score": s} for c, s in amb])
            mentions.append(rec)
        out.append({"id": doc["id"], "category": doc["category"], "text": doc["text"], "mentions": mentions})
    return out


def stats(kb, docs):
    aliases = build_aliases(kb)
    def counts(ds):
        sents = 0
        for d in ds:
            seg = d["text"]
            for sep in ".!?؟\n":
                seg = seg.replace(sep, "\x00")
            sents += sum(1 for s in seg.split("\x00") if tokenize(s))
        words = sum(len(tokenize(d["text"])) for d in ds)
        ents = sum(len(d["mentions"]) for d in ds)
        cands = sum(len(aliases.get(normalize(m["surface"]), ())) for d in ds for m in d["mentions"])
        nd = len(ds)
        return {"documents": nd, "sentences": sents, "words": words, "entities": ents,
                "candidates": cands,
                "words_per_article": words / nd if nd else 0.0,
                "entities_per_article": ents / nd if nd else 0.0,
                "candidates_per_mention": cands / ents if ents else 0.0}
    cats = sorted({d["category"] for d in docs})
    return {"total": counts(docs),
            "per_category": {c: counts([d for d in docs if d["category"] == c]) for c in cats}}


def main():
    fixtures = Path(sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/fixtures")
    kb, lists, docs = load(fixtures)
    preds = trace(kb, lists, docs)
    with open(fixtures / "golden_predictions.jsonl", "w", encoding="utf-8") as f:
        for p in preds:
            f.write(json.dumps(p, ensure_ascii=False) + "\n")
    with open(fixtures / "mini_corpus_stats.json", "w", encoding="utf-8") as f:
        json.dump(stats(kb, docs), f, ensure_ascii=False, indent=2)
        f.write("\n")
    for d, p in zip(docs, preds):
        for m, pm in zip(d["mentions"], p["mentions"]):
            flag = "" if m.get("gold") == pm["prediction"] else "   <-- gold " + str(m.get("gold"))
            print(f'{d["id"]} {m["surface"]:<20} {pm["prediction"]:<18} {pm["score"]:.4f}{flag}')


if __name__ == "__main__":
    main()
