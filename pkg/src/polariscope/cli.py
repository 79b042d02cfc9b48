"""Pipeline CLI: ingest -> annotate -> clean -> train -> embed-load -> index
-> classify -> polarize -> serve/report.

Each stage writes its artifacts into the workdir and records an input
fingerprint in manifest.json; re-running a stage whose fingerprint is
unchanged is a no-op.
"""
from __future__ import annotations

import csv
import json
from importlib import resources
from pathlib import Path
from typing import Optional

import click

from . import __version__
from .annotate import AnnotationReport, default_rules, load_rules, merge_categories
from .ann import build_index, load_index, save_index
from .classify import (
    KMeansConfig,
    SplitConfig,
    SVMConfig,
    cluster_accuracy,
    evaluate,
    kmeans_fit,
    labeled_set,
    stratified_split,
    svm_train,
)
from .clean import CleanPolicy, ExternalFileTagger, RuleBasedTagger, clean_bundle
from .corpus import PartyKind, validate_politician
from .embed import (
    D2VConfig,
    DatasetKind,
    W2VConfig,
    load_attention_scores,
    load_external_embeddings,
    load_embedding_set,
    save_embedding_set,
    tokenize,
    train_doc2vec,
    train_word2vec,
)
from .ingest import (
    FetchCache,
    FetchMode,
    PageSource,
    RawPage,
    fetch_page,
    load_dump,
    merge_identities,
    parse_roster,
    parse_sections,
)
from .polarize import candidate_polarization, cohort_summary
from .store import (
    RunManifest,
    file_checksum,
    fingerprint_of,
    load_corpus,
    save_corpus,
)

DATASETS = ("political", "background")
PARTY_TAGS = {PartyKind.DEMOCRATIC: "dem", PartyKind.REPUBLICAN: "rep"}


def fixtures_dir() -> Path:
    return Path(str(resources.files("polariscope.data").joinpath("fixtures")))


def _workdir_option(fn):
    return click.option(
        "--workdir",
        required=True,
        type=click.Path(path_type=Path, file_okay=False),
        help="pipeline working directory (created if missing)",
    )(fn)


def _stage_guard(manifest: RunManifest, stage: str, fingerprint: str) -> bool:
    if manifest.is_current(stage, fingerprint):
        click.echo(f"[{stage}] up to date (fingerprint {fingerprint}); skipping")
        return True
    return False


def _need(path: Path, producer: str) -> Path:
    if not path.exists():
        raise click.ClickException(
            f"missing {path.name}; run the `{producer}` subcommand first"
        )
    return path


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Politician-embedding polarization pipeline."""


# --------------------------------------------------------------------------
# ingest
# --------------------------------------------------------------------------

@main.command()
@_workdir_option
@click.option("--dump", type=click.Path(exists=True, path_type=Path), default=None,
              help="JSON Lines page dump")
@click.option("--roster-dir", type=click.Path(exists=True, path_type=Path), default=None,
              help="directory of congress_<N>.html roster pages")
@click.option("--titles", type=click.Path(exists=True, path_type=Path), default=None,
              help="newline-delimited page titles to fetch live (cached)")
@click.option("--cache", type=click.Path(path_type=Path), default=None,
              help="fetch cache root (default: POLARISCOPE_CACHE)")
@click.option("--fixture", is_flag=True, help="use the bundled 12-politician fixture corpus")
def ingest(workdir: Path, dump, roster_dir, titles, cache, fixture) -> None:
    """Parse roster + biography pages into the corpus file."""
    if fixture:
        dump = fixtures_dir() / "dump.jsonl"
        roster_dir = fixtures_dir() / "rosters"
    if dump is None or roster_dir is None:
        raise click.ClickException("need --dump and --roster-dir (or --fixture)")
    workdir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest.load(workdir)
    roster_files = sorted(Path(roster_dir).glob("congress_*.html"))
    if not roster_files:
        raise click.ClickException(f"no congress_*.html files under {roster_dir}")
    fingerprint = fingerprint_of(
        "ingest", file_checksum(dump), *[file_checksum(f) for f in roster_files]
    )
    corpus_path = workdir / "corpus.jsonl"
    if _stage_guard(manifest, "ingest", fingerprint):
        return

    pages = {}
    for page in load_dump(dump):
        pages[page.title] = parse_sections(page)
    if titles is not None:
        fetch_cache = FetchCache(cache)
        for title in Path(titles).read_text("utf-8").splitlines():
            title = title.strip()
            if title and title not in pages:
                page = fetch_page(title, fetch_cache, FetchMode.LIVE_THEN_CACHE)
                pages[title] = parse_sections(page)

    entries = []
    for f in roster_files:
        congress = int(f.stem.split("_")[1])
        page = RawPage(title=f.stem, payload=f.read_text("utf-8"), source=PageSource.FIXTURE)
        entries.extend(parse_roster(page, congress))
    merged = merge_identities(entries, pages)
    for warning in merged.warnings:
        click.echo(f"[ingest] warning: {warning}")
    for gap in merged.gaps:
        click.echo(f"[ingest] gap: no page for {gap!r}")
    bad = 0
    for p in merged.politicians:
        violations = validate_politician(p)
        if violations:
            bad += 1
            click.echo(f"[ingest] invalid {p.id}: {violations}")
    if bad:
        raise click.ClickException(f"{bad} invalid politician record(s)")
    checksum = save_corpus(merged.politicians, corpus_path)
    manifest.record("ingest", fingerprint, [corpus_path])
    click.echo(
        f"[ingest] {len(merged.politicians)} politicians from {len(entries)} roster "
        f"entries -> {corpus_path} (sha256 {checksum[:12]})"
    )


# --------------------------------------------------------------------------
# annotate
# --------------------------------------------------------------------------

@main.command()
@_workdir_option
@click.option("--rules", "rules_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="heading rule file (JSON); default: shipped rules")
@click.option("--strict", is_flag=True,
              help="unmapped headings are excluded instead of falling to 'other'")
def annotate(workdir: Path, rules_path, strict: bool) -> None:
    """Map section headings into the three categories and merge the bodies."""
    corpus_path = _need(workdir / "corpus.jsonl", "ingest")
    manifest = RunManifest.load(workdir)
    fingerprint = fingerprint_of(
        "annotate",
        file_checksum(corpus_path),
        file_checksum(rules_path) if rules_path else "default-rules",
        strict,
    )
    if _stage_guard(manifest, "annotate", fingerprint):
        return
    rules = (
        load_rules(rules_path, "unmapped" if strict else "other")
        if rules_path
        else default_rules(strict)
    )
    corpus = load_corpus(corpus_path)
    total = AnnotationReport()
    annotated = []
    for p in corpus:
        bundle, report = merge_categories(p.sections, rules)
        total.merge(report)
        annotated.append(p.with_categories(bundle))
    save_corpus(annotated, corpus_path)
    report_path = workdir / "annotation_report.json"
    report_path.write_text(
        json.dumps(
            {
                "total_headings": total.total_headings,
                "mapped": total.mapped,
                "unmapped": total.unmapped,
                "per_category_counts": total.per_category_counts,
                "strict": strict,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        "utf-8",
    )
    manifest.record("annotate", fingerprint, [corpus_path, report_path])
    click.echo(
        f"[annotate] {total.total_headings} headings: {total.mapped} mapped, "
        f"{sum(total.unmapped.values())} unmapped -> {report_path}"
    )


# --------------------------------------------------------------------------
# clean
# --------------------------------------------------------------------------

@main.command()
@_workdir_option
@click.option("--entities", type=click.Path(exists=True, path_type=Path), default=None,
              help="external entity span file (JSON Lines); default: rule-based tagger")
@click.option("--placeholder", is_flag=True, help="mask with <ent> instead of deleting")
def clean(workdir: Path, entities, placeholder: bool) -> None:
    """Apply entity masking, number/noise stripping, and party-term removal."""
    corpus_path = _need(workdir / "corpus.jsonl", "ingest")
    manifest = RunManifest.load(workdir)
    policy = CleanPolicy(mask_mode="placeholder" if placeholder else "delete")
    fingerprint = fingerprint_of(
        "clean",
        file_checksum(corpus_path),
        policy.policy_id,
        file_checksum(entities) if entities else "rule-based",
    )
    if _stage_guard(manifest, "clean", fingerprint):
        return
    corpus = load_corpus(corpus_path)
    if any(p.categories is None for p in corpus):
        raise click.ClickException("corpus has no categories; run the `annotate` subcommand first")
    tagger = ExternalFileTagger(entities) if entities else RuleBasedTagger()
    cleaned = [
        p.with_clean(clean_bundle(p.categories, tagger, policy, p.id)) for p in corpus
    ]
    save_corpus(cleaned, corpus_path)
    manifest.record("clean", fingerprint, [corpus_path])
    click.echo(f"[clean] policy {policy.policy_id} applied to {len(cleaned)} politicians")


# --------------------------------------------------------------------------
# train
# --------------------------------------------------------------------------

@main.command()
@_workdir_option
@click.option("--dim", default=64, show_default=True)
@click.option("--window", default=5, show_default=True)
@click.option("--negatives", default=5, show_default=True)
@click.option("--epochs", default=20, show_default=True)
@click.option("--min-count", default=2, show_default=True)
@click.option("--subsample", default=1e-3, show_default=True)
@click.option("--seed", default=1, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--mode", type=click.Choice(["pv-dm", "pv-dbow"]), default="pv-dm",
              show_default=True)
@click.option("--word-min-count", default=1, show_default=True,
              help="min count for the per-(party, phase) word models")
def train(workdir: Path, dim, window, negatives, epochs, min_count, subsample, seed,
          workers, mode, word_min_count) -> None:
    """Train doc2vec per dataset kind and word2vec per (party, phase) cell."""
    corpus_path = _need(workdir / "corpus.jsonl", "ingest")
    manifest = RunManifest.load(workdir)
    d2v_cfg = D2VConfig(
        dim=dim, window=window, negatives=negatives, epochs=epochs, seed=seed,
        min_count=min_count, subsample=subsample, workers=workers, mode=mode,
    )
    w2v_cfg = W2VConfig(
        dim=dim, window=window, negatives=negatives, epochs=epochs, seed=seed,
        min_count=word_min_count, subsample=subsample, workers=workers,
    )
    fingerprint = fingerprint_of(
        "train", file_checksum(corpus_path), d2v_cfg.fingerprint(), w2v_cfg.fingerprint()
    )
    if _stage_guard(manifest, "train", fingerprint):
        return
    corpus = load_corpus(corpus_path)
    if any(p.clean is None for p in corpus):
        raise click.ClickException("corpus has no clean bundles; run the `clean` subcommand first")

    outputs = []
    emb_dir = workdir / "embeddings"
    for kind in DATASETS:
        docs = [(p.id, tokenize(p.clean.get(kind))) for p in corpus]
        model = train_doc2vec(docs, d2v_cfg, dataset_kind=DatasetKind(kind))
        if model.empty_docs:
            click.echo(f"[train] {kind}: empty documents {model.empty_docs}")
        out = emb_dir / f"{kind}_d2v.pemb"
        save_embedding_set(model.doc_embedding_set(normalized=True), out)
        outputs.append(out)
        click.echo(
            f"[train] doc2vec {kind}: {len(docs)} docs, vocab {len(model.vocab)}, "
            f"final epoch loss {model.epoch_losses[-1]:.4f} -> {out}"
        )

    words_dir = workdir / "words"
    for party_kind, tag in PARTY_TAGS.items():
        for phase in (1, 2, 3, 4):
            docs = [
                tokenize(p.clean.political)
                for p in corpus
                if p.party.kind is party_kind and phase in p.phases
            ]
            docs = [d for d in docs if d]
            if not docs:
                click.echo(f"[train] word cell {tag}/phase{phase}: no documents, skipped")
                continue
            model = train_word2vec(docs, w2v_cfg)
            out = words_dir / f"{tag}_phase{phase}.pemb"
            save_embedding_set(model.word_embedding_set(normalized=True), out)
            outputs.append(out)
            click.echo(
                f"[train] word cell {tag}/phase{phase}: {len(docs)} docs, "
                f"vocab {len(model.vocab)} -> {out}"
            )
    manifest.record("train", fingerprint, outputs)


# --------------------------------------------------------------------------
# embed-load
# --------------------------------------------------------------------------

@main.command("embed-load")
@_workdir_option
@click.option("--manifest", "manifests", multiple=True,
              type=click.Path(exists=True, path_type=Path),
              help="external embedding manifest JSON (repeatable)")
@click.option("--attention", "attention_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="attention score export (JSON Lines)")
@click.option("--fixture", is_flag=True,
              help="load the bundled fixture external vectors and attention scores")
def embed_load(workdir: Path, manifests, attention_path, fixture: bool) -> None:
    """Ingest externally computed (e.g. transformer) vectors and attention scores."""
    corpus_path = _need(workdir / "corpus.jsonl", "ingest")
    if fixture:
        manifests = tuple(sorted(fixtures_dir().glob("external/*.manifest.json")))
        attention_path = fixtures_dir() / "attention.jsonl"
    if not manifests and attention_path is None:
        raise click.ClickException("need --manifest and/or --attention (or --fixture)")
    run_manifest = RunManifest.load(workdir)
    fingerprint = fingerprint_of(
        "embed-load",
        file_checksum(corpus_path),
        *[file_checksum(m) for m in manifests],
        file_checksum(attention_path) if attention_path else "no-attention",
    )
    if _stage_guard(run_manifest, "embed-load", fingerprint):
        return
    corpus_ids = [p.id for p in load_corpus(corpus_path)]
    outputs = []
    if attention_path is not None:
        records = load_attention_scores(attention_path)
        known = set(corpus_ids)
        orphans = [r.politician_id for r in records if r.politician_id not in known]
        if orphans:
            click.echo(f"[embed-load] attention orphan ids: {orphans}")
        out = workdir / "attention.jsonl"
        out.write_text(Path(attention_path).read_text("utf-8"), "utf-8")
        outputs.append(out)
        click.echo(f"[embed-load] {len(records)} attention records -> {out}")
    for mpath in manifests:
        loaded = load_external_embeddings(mpath, corpus_ids)
        emb = loaded.embeddings
        if loaded.orphans:
            click.echo(f"[embed-load] {mpath.name}: orphan ids {loaded.orphans}")
        kind = emb.dataset_kind.value
        raw_out = workdir / "embeddings" / "raw" / f"{kind}_external.pemb"
        save_embedding_set(emb, raw_out)
        out = workdir / "embeddings" / f"{kind}_external.pemb"
        save_embedding_set(emb.normalize(), out)
        outputs.extend([raw_out, out])
        click.echo(f"[embed-load] {len(emb)} vectors (dim {emb.dim}, {kind}) -> {out}")
    run_manifest.record("embed-load", fingerprint, outputs)


# --------------------------------------------------------------------------
# index
# --------------------------------------------------------------------------

@main.command()
@_workdir_option
@click.option("--trees", default=50, show_default=True)
@click.option("--leaf-capacity", default=32, show_default=True)
@click.option("--seed", default=0, show_default=True)
def index(workdir: Path, trees, leaf_capacity, seed) -> None:
    """Build ANN indexes over every embedding set in the workdir."""
    emb_dir = workdir / "embeddings"
    if not emb_dir.exists() or not list(emb_dir.glob("*.pemb")):
        raise click.ClickException(
            "no embedding sets found; run the `train` (and optionally `embed-load`) "
            "subcommand first"
        )
    manifest = RunManifest.load(workdir)
    pembs = sorted(emb_dir.glob("*.pemb"))
    fingerprint = fingerprint_of(
        "index", trees, leaf_capacity, seed, *[file_checksum(f) for f in pembs]
    )
    if _stage_guard(manifest, "index", fingerprint):
        return
    outputs = []
    for pemb in pembs:
        emb = load_embedding_set(pemb, normalized=True)
        idx = build_index(emb, n_trees=trees, leaf_capacity=leaf_capacity, seed=seed)
        out = workdir / "indexes" / f"{pemb.stem}.pann"
        save_index(idx, out)
        outputs.append(out)
        click.echo(f"[index] {pemb.stem}: {len(idx)} items, {trees} trees -> {out}")
    manifest.record("index", fingerprint, outputs)


# --------------------------------------------------------------------------
# classify
# --------------------------------------------------------------------------

@main.command()
@_workdir_option
@click.option("--train-fraction", default=0.8, show_default=True)
@click.option("--split-seed", default=0, show_default=True)
@click.option("--lam", default=1e-4, show_default=True)
@click.option("--svm-epochs", default=100, show_default=True)
@click.option("--restarts", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
def classify(workdir: Path, train_fraction, split_seed, lam, svm_epochs, restarts, seed) -> None:
    """k-means and SVM party classification over every embedding set."""
    corpus_path = _need(workdir / "corpus.jsonl", "ingest")
    emb_dir = workdir / "embeddings"
    pembs = sorted(emb_dir.glob("*.pemb")) if emb_dir.exists() else []
    if not pembs:
        raise click.ClickException("no embedding sets; run the `train` subcommand first")
    manifest = RunManifest.load(workdir)
    split_cfg = SplitConfig(train_fraction=train_fraction, seed=split_seed)
    svm_cfg = SVMConfig(lam=lam, epochs=svm_epochs, seed=seed)
    km_cfg = KMeansConfig(seed=seed, restarts=restarts)
    fingerprint = fingerprint_of(
        "classify", file_checksum(corpus_path), split_cfg.fingerprint(),
        svm_cfg.fingerprint(), km_cfg.fingerprint(), *[file_checksum(f) for f in pembs],
    )
    if _stage_guard(manifest, "classify", fingerprint):
        return
    corpus = load_corpus(corpus_path)
    party_of = {p.id: p.party for p in corpus}
    outputs = []
    reports_dir = workdir / "reports"
    reports_dir.mkdir(parents=True, exist_ok=True)
    for pemb in pembs:
        kind, provenance = pemb.stem.split("_", 1)
        emb = load_embedding_set(pemb, normalized=True)
        data = labeled_set(emb, party_of)
        # unsupervised route: cluster all labeled vectors
        _, assignments, inertia = kmeans_fit(data.matrix(), km_cfg)
        km_acc = cluster_accuracy(assignments, data.label_array())
        km_report = {
            "model": "kmeans",
            "dataset_kind": kind,
            "provenance": provenance,
            "accuracy": km_acc.accuracy,
            "inertia": inertia,
            "config_fingerprint": km_cfg.fingerprint(),
        }
        raw_pemb = emb_dir / "raw" / pemb.name
        if provenance == "external" and raw_pemb.exists():
            raw = labeled_set(load_embedding_set(raw_pemb), party_of)
            _, raw_assign, _ = kmeans_fit(raw.matrix(), km_cfg)
            km_report["accuracy_raw"] = cluster_accuracy(
                raw_assign, raw.label_array()
            ).accuracy
        out = reports_dir / f"kmeans_{kind}_{provenance}.json"
        out.write_text(json.dumps(km_report, indent=2, sort_keys=True) + "\n", "utf-8")
        outputs.append(out)
        # supervised route
        train_set, test_set = stratified_split(data, split_cfg)
        model = svm_train(train_set, svm_cfg)
        report = evaluate(model, test_set, model_name="svm",
                          split_fingerprint=split_cfg.fingerprint())
        svm_report = report.as_dict()
        svm_report["provenance"] = provenance
        svm_report["dataset_kind"] = kind
        out = reports_dir / f"svm_{kind}_{provenance}.json"
        out.write_text(json.dumps(svm_report, indent=2, sort_keys=True) + "\n", "utf-8")
        outputs.append(out)
        click.echo(
            f"[classify] {kind}/{provenance}: kmeans {km_acc.accuracy:.3f}, "
            f"svm {report.accuracy:.3f} (test n={len(test_set)})"
        )
    manifest.record("classify", fingerprint, outputs)


# --------------------------------------------------------------------------
# polarize
# --------------------------------------------------------------------------

@main.command()
@_workdir_option
@click.option("--k", default=20, show_default=True)
@click.option("--search-k", default=None, type=int, help="candidate budget (default trees*k)")
def polarize(workdir: Path, k: int, search_k) -> None:
    """Per-candidate kNN polarization ratios over every index."""
    corpus_path = _need(workdir / "corpus.jsonl", "ingest")
    idx_dir = workdir / "indexes"
    panns = sorted(idx_dir.glob("*.pann")) if idx_dir.exists() else []
    if not panns:
        raise click.ClickException("no indexes; run the `index` subcommand first")
    manifest = RunManifest.load(workdir)
    fingerprint = fingerprint_of(
        "polarize", k, search_k, file_checksum(corpus_path),
        *[file_checksum(f) for f in panns],
    )
    if _stage_guard(manifest, "polarize", fingerprint):
        return
    corpus = load_corpus(corpus_path)
    party_of = {p.id: p.party for p in corpus}
    phase_of = {p.id: max(p.phases) for p in corpus}  # most recent era
    outputs = []
    scores_dir = workdir / "scores"
    scores_dir.mkdir(parents=True, exist_ok=True)
    for pann in panns:
        kind, provenance = pann.stem.split("_", 1)
        idx = load_index(pann)
        eligible = [
            i for i in idx.ids if i in party_of and party_of[i].is_major
        ]
        if len(eligible) <= k:
            raise click.ClickException(
                f"{pann.stem}: only {len(eligible)} major-party candidates indexed; "
                f"--k {k} needs at least k+1"
            )
        scores = [
            candidate_polarization(idx, pid, k, party_of, dataset_kind=kind,
                                   search_k=search_k)
            for pid in eligible
        ]
        base = scores_dir / f"{kind}_{provenance}_k{k}"
        json_path = base.with_suffix(".json")
        json_path.write_text(
            json.dumps(
                [
                    {
                        "id": s.politician_id,
                        "dataset": kind,
                        "provenance": provenance,
                        "k": s.k,
                        "same_party_count": s.same_party_count,
                        "ratio": s.ratio,
                        "democrat_fraction": s.democrat_fraction,
                        "neighbor_ids": list(s.neighbor_ids),
                        "neighbor_parties": list(s.neighbor_parties),
                        "neighbor_scores": list(s.neighbor_scores),
                    }
                    for s in scores
                ],
                indent=2,
                sort_keys=True,
            )
            + "\n",
            "utf-8",
        )
        csv_path = base.with_suffix(".csv")
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["id", "dataset", "provenance", "k", "same_party_count", "ratio",
                 "democrat_fraction"]
            )
            for s in scores:
                writer.writerow(
                    [s.politician_id, kind, provenance, s.k, s.same_party_count,
                     f"{s.ratio:.6f}", f"{s.democrat_fraction:.6f}"]
                )
        cohorts = {
            "by_party": [
                c.__dict__ for c in cohort_summary(
                    scores, lambda s: party_of[s.politician_id].kind.value
                )
            ],
            "by_phase": [
                c.__dict__ for c in cohort_summary(
                    scores, lambda s: phase_of[s.politician_id]
                )
            ],
        }
        cohort_path = scores_dir / f"{kind}_{provenance}_k{k}_cohorts.json"
        cohort_path.write_text(json.dumps(cohorts, indent=2, sort_keys=True) + "\n", "utf-8")
        outputs.extend([json_path, csv_path, cohort_path])
        mean_ratio = sum(s.ratio for s in scores) / len(scores)
        click.echo(
            f"[polarize] {kind}/{provenance}: {len(scores)} candidates, "
            f"mean ratio {mean_ratio:.3f} -> {json_path}"
        )
    manifest.record("polarize", fingerprint, outputs)


# --------------------------------------------------------------------------
# report / serve
# --------------------------------------------------------------------------

@main.command()
@_workdir_option
def report(workdir: Path) -> None:
    """Print the accuracy tables and cohort summaries."""
    reports_dir = workdir / "reports"
    rows = []
    if reports_dir.exists():
        for f in sorted(reports_dir.glob("*.json")):
            rows.append(json.loads(f.read_text("utf-8")))
    if not rows:
        raise click.ClickException("no classification reports; run the `classify` subcommand first")
    label = {"d2v": "Doc2Vec", "external": "External"}
    for model, title in (("kmeans", "K-means Classification Results"),
                         ("svm", "Binary SVM Classification Results")):
        click.echo(f"\n{title}")
        click.echo(f"{'Model':<12} {'Data':<12} {'Accuracy':>8}")
        for row in rows:
            if row["model"] != model:
                continue
            name = label.get(row.get("provenance", ""), row.get("provenance", ""))
            click.echo(
                f"{name:<12} {row['dataset_kind'].capitalize():<12} "
                f"{100 * row['accuracy']:>8.3f}"
            )
    scores_dir = workdir / "scores"
    cohort_files = sorted(scores_dir.glob("*_cohorts.json")) if scores_dir.exists() else []
    for f in cohort_files:
        cohorts = json.loads(f.read_text("utf-8"))
        click.echo(f"\nPolarization cohorts ({f.stem.replace('_cohorts', '')})")
        for group_kind, items in cohorts.items():
            for c in items:
                click.echo(
                    f"  {group_kind} {c['group']:<12} n={c['count']:<4} "
                    f"mean ratio {c['mean_ratio']:.3f}"
                )


@main.command()
@click.option("--snapshot", "snapshot_dir", type=click.Path(exists=True, path_type=Path),
              default=None, help="snapshot directory (default: POLARISCOPE_SNAPSHOT)")
@click.option("--port", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--allow-origin", default=None, help="CORS origin for the explorer UI")
def serve(snapshot_dir, port, host, allow_origin) -> None:
    """Serve the read-only HTTP API over a snapshot."""
    from .service import Snapshot, default_snapshot_dir

    snapshot_dir = snapshot_dir or default_snapshot_dir()
    if not snapshot_dir:
        raise click.ClickException(
            "no snapshot directory; pass --snapshot or set POLARISCOPE_SNAPSHOT"
        )
    try:
        snapshot = Snapshot.load(snapshot_dir)
    except Exception as exc:
        raise click.ClickException(str(exc)) from exc
    if not snapshot.indexes:
        raise click.ClickException(
            "snapshot has no ANN indexes; run the `index` subcommand first"
        )
    from .service import create_app
    import uvicorn

    app = create_app(snapshot, allow_origin=allow_origin)
    click.echo(
        f"[serve] {len(snapshot.politicians)} politicians, "
        f"indexes {sorted(snapshot.indexes)} on http://{host}:{port}"
    )
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
