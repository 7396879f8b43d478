"""Command-line pipeline around the library.

Subcommands cover the whole workflow: ``vocab`` and ``cooc`` build the word
tables, ``init-bpe`` bootstraps an initial segmented lexicon, ``subword-embed``
solves subword vectors, ``refine`` runs the alternating refinement,
``segment-embed`` applies a lexicon to running text, ``distill`` compresses a
segmented corpus into a bigram model, ``segment`` applies that model, and the
``eval-*`` commands score outputs.

Exit codes: 2 usage, 3 invalid data, 4 numerical failure, 5 I/O.  File
outputs are written atomically; ``-`` reads stdin or writes stdout.
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter
from collections.abc import Iterable, Iterator
from contextlib import contextmanager
from typing import IO

from subseg import bigram, cooccur, lexseg, metrics, subspace, textio
from subseg.errors import ArgumentError, NumericalError, ValidationError


def _input_lines(path: str) -> Iterator[str]:
    if path == "-":
        return textio.read_corpus(sys.stdin)
    return textio.read_corpus(path)


@contextmanager
def _output_stream(path: str) -> Iterator[IO[str]]:
    if path == "-":
        yield sys.stdout
    else:
        with textio.atomic_text_writer(path) as handle:
            yield handle


def _parse_ridge(text: str) -> float | None:
    if text == "auto":
        return None
    try:
        value = float(text)
    except ValueError:
        raise ArgumentError(f"ridge must be 'auto' or a number, got {text!r}") from None
    return value


def _write_segmented(
    rows: Iterable[list[tuple[str, ...]]], handle: IO[str], word_per_line: bool
) -> None:
    for row in rows:
        if word_per_line:
            for parts in row:
                handle.write(" ".join(parts) + "\n")
        else:
            handle.write(" ".join(part for parts in row for part in parts) + "\n")


def _cmd_vocab(args: argparse.Namespace) -> int:
    vocab = textio.build_vocabulary(
        _input_lines(args.corpus),
        max_size=args.max_size,
        min_freq=args.min_freq,
        threads=args.threads,
    )
    textio.save_vocabulary(vocab, args.output)
    return 0


def _cmd_cooc(args: argparse.Namespace) -> int:
    vocab = textio.load_vocabulary(args.vocab)
    counts = cooccur.count_cooccurrences(
        _input_lines(args.corpus), vocab, window=args.window, threads=args.threads
    )
    cooccur.save_counts(counts, args.output)
    return 0


def _cmd_init_bpe(args: argparse.Namespace) -> int:
    vocab = textio.load_vocabulary(args.vocab)
    merges = textio.bpe_train(
        _input_lines(args.corpus), args.target_size, threads=args.threads
    )
    lexicon = textio.SegmentedLexicon(
        (word, textio.bpe_segment(word, merges)) for word in vocab.tokens
    )
    textio.save_lexicon(lexicon, args.lexicon_out)
    if args.merges_out:
        textio.save_merges(merges, args.merges_out)
    return 0


def _load_aligned(path: str, vocab: textio.Vocabulary) -> subspace.EmbeddingTable:
    return subspace.align_embeddings(subspace.load_embeddings(path), vocab.tokens)


def _check_counts(counts: cooccur.CooccurrenceCounts, vocab: textio.Vocabulary) -> None:
    if counts.vocab_size != len(vocab):
        raise ValidationError(
            f"counts cover {counts.vocab_size} words but the vocabulary has {len(vocab)}"
        )


def _cmd_subword_embed(args: argparse.Namespace) -> int:
    vocab = textio.load_vocabulary(args.vocab)
    counts = cooccur.load_counts(args.counts)
    _check_counts(counts, vocab)
    output_rows = _load_aligned(args.output_matrix, vocab)
    if args.lexicon:
        lexicon = textio.load_lexicon(args.lexicon)
        subwords, matrix = subspace.build_segmentation_matrix(vocab.tokens, lexicon=lexicon)
    else:
        subwords, matrix = subspace.build_segmentation_matrix(
            vocab.tokens, max_substring_len=args.substr_max_len
        )
    table = subspace.compute_subword_embeddings(
        subwords,
        matrix,
        counts,
        output_rows,
        smoothing=args.smoothing,
        ridge=_parse_ridge(args.ridge),
    )
    subspace.save_embeddings(table, args.output)
    return 0


def _cmd_refine(args: argparse.Namespace) -> int:
    vocab = textio.load_vocabulary(args.vocab)
    counts = cooccur.load_counts(args.counts)
    _check_counts(counts, vocab)
    word_embeddings = _load_aligned(args.embeddings, vocab)
    output_rows = _load_aligned(args.output_matrix, vocab)
    lexicon0 = textio.load_lexicon(args.lexicon)

    def report(stats: lexseg.IterationStats) -> None:
        print(
            f"{stats.iteration}\t{stats.changed_words}\t{stats.subword_count}",
            file=sys.stderr,
        )

    state = lexseg.refine(
        lexicon0,
        word_embeddings,
        counts,
        output_rows,
        alpha=args.alpha,
        smoothing=args.smoothing,
        ridge=_parse_ridge(args.ridge),
        max_iters=args.max_iters,
        progress=report,
    )
    textio.save_lexicon(state.lexicon, args.output)
    if args.subword_embeddings_out:
        subspace.save_embeddings(state.embeddings, args.subword_embeddings_out)
    return 0


def _cmd_segment_embed(args: argparse.Namespace) -> int:
    lexicon = textio.load_lexicon(args.lexicon)
    rows = lexseg.segment_corpus(
        _input_lines(args.corpus), lexicon, oov_policy=args.oov_policy
    )
    with _output_stream(args.output) as handle:
        _write_segmented(rows, handle, args.word_per_line)
    return 0


def _cmd_distill(args: argparse.Namespace) -> int:
    groups = bigram.iter_word_groups(_input_lines(args.corpus), separator=args.separator)
    model = bigram.distill(groups)
    bigram.save_model(model, args.output)
    return 0


def _cmd_segment(args: argparse.Namespace) -> int:
    model = bigram.load_model(args.model)

    def rows() -> Iterator[list[tuple[str, ...]]]:
        for line in _input_lines(args.corpus):
            segmented: list[tuple[str, ...]] = []
            for word in line.split():
                if args.exact:
                    result = bigram.exact_segment(word, model)
                else:
                    result = bigram.beam_segment(word, model, beam_size=args.beam)
                segmented.append(result.subwords)
            yield segmented

    with _output_stream(args.output) as handle:
        _write_segmented(rows(), handle, args.word_per_line)
    return 0


def _cmd_eval_boundaries(args: argparse.Namespace) -> int:
    predicted = textio.load_lexicon(args.pred)
    gold = textio.load_lexicon(args.gold)
    report = metrics.boundary_prf(predicted, gold)
    with _output_stream(args.output) as handle:
        handle.write(f"words evaluated: {len(predicted)}\n")
        handle.write(f"predicted boundaries: {report.predicted_boundaries}\n")
        handle.write(f"gold boundaries: {report.gold_boundaries}\n")
        handle.write(f"true positives: {report.true_positives}\n")
        handle.write(
            f"P={report.precision!r} R={report.recall!r} F1={report.f1!r}\n"
        )
    return 0


def _cmd_eval_renyi(args: argparse.Namespace) -> int:
    frequencies: Counter = Counter()
    for line in _input_lines(args.tokens):
        frequencies.update(line.split())
    if args.word_separator is not None and not args.include_word_separator:
        frequencies.pop(args.word_separator, None)
    observed = sum(1 for count in frequencies.values() if count > 0)
    vocab_size = args.vocab_size if args.vocab_size is not None else observed
    report = metrics.renyi_efficiency(frequencies, vocab_size, alpha=args.alpha)
    with _output_stream(args.output) as handle:
        handle.write(f"token count: {sum(frequencies.values())}\n")
        handle.write(f"distinct types: {observed}\n")
        handle.write(f"vocab size: {vocab_size}\n")
        handle.write(f"alpha: {report.alpha!r}\n")
        handle.write(
            f"H={report.entropy!r} Hmax={report.max_entropy!r} EFF={report.efficiency!r}\n"
        )
    return 0


def _add_threads(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--threads",
        type=int,
        default=1,
        help="worker threads for counting; results are identical for any value",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subseg",
        description="Embedding-grounded subword segmentation pipeline.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("vocab", help="build a word vocabulary from a corpus")
    p.add_argument("corpus", nargs="?", default="-", help="corpus file or - for stdin")
    p.add_argument("--max-size", type=int, default=200_000, help="keep at most this many types")
    p.add_argument("--min-freq", type=int, default=1, help="drop rarer types")
    _add_threads(p)
    p.add_argument("-o", "--output", required=True, help="vocabulary file to write")
    p.set_defaults(func=_cmd_vocab)

    p = commands.add_parser("cooc", help="count windowed co-occurrences")
    p.add_argument("corpus", nargs="?", default="-")
    p.add_argument("--vocab", required=True, help="vocabulary file")
    p.add_argument("--window", type=int, default=5, help="window size in positions")
    _add_threads(p)
    p.add_argument("-o", "--output", required=True, help="counts file to write")
    p.set_defaults(func=_cmd_cooc)

    p = commands.add_parser(
        "init-bpe", help="bootstrap an initial lexicon with pair merging"
    )
    p.add_argument("corpus", nargs="?", default="-")
    p.add_argument("--vocab", required=True, help="vocabulary whose words get segmented")
    p.add_argument("--target-size", type=int, required=True, help="induced subword inventory size")
    p.add_argument("--lexicon-out", required=True, help="initial lexicon file to write")
    p.add_argument("--merges-out", default=None, help="optionally save the merge rules")
    _add_threads(p)
    p.set_defaults(func=_cmd_init_bpe)

    p = commands.add_parser("subword-embed", help="solve subword vectors in the word space")
    p.add_argument("--vocab", required=True)
    p.add_argument("--counts", required=True, help="co-occurrence counts file")
    p.add_argument("--output-matrix", required=True, help="per-word output vectors (W rows)")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--lexicon", default=None, help="segmented lexicon defining the subwords")
    group.add_argument(
        "--substr-max-len", type=int, default=None, help="enumerate all substrings up to this length"
    )
    p.add_argument("--lambda", dest="smoothing", type=float, default=0.1, help="additive smoothing")
    p.add_argument("--ridge", default="auto", help="ridge strength or 'auto'")
    p.add_argument("-o", "--output", required=True, help="subword embedding file to write")
    p.set_defaults(func=_cmd_subword_embed)

    p = commands.add_parser("refine", help="alternate subword solving and re-segmentation")
    p.add_argument("--vocab", required=True)
    p.add_argument("--counts", required=True)
    p.add_argument("--embeddings", required=True, help="per-word input vectors (E rows)")
    p.add_argument("--output-matrix", required=True, help="per-word output vectors (W rows)")
    p.add_argument("--lexicon", required=True, help="initial segmented lexicon")
    p.add_argument("--alpha", type=float, default=1.0, help="per-subword score penalty")
    p.add_argument("--lambda", dest="smoothing", type=float, default=0.1)
    p.add_argument("--ridge", default="auto")
    p.add_argument("--max-iters", type=int, default=10)
    p.add_argument("-o", "--output", required=True, help="refined lexicon file to write")
    p.add_argument(
        "--subword-embeddings-out", default=None, help="optionally save the final subword vectors"
    )
    p.set_defaults(func=_cmd_refine)

    p = commands.add_parser("segment-embed", help="apply a segmented lexicon to running text")
    p.add_argument("corpus", nargs="?", default="-")
    p.add_argument("--lexicon", required=True)
    p.add_argument(
        "--oov-policy",
        choices=lexseg.OOV_POLICIES,
        default="whole",
        help="how to treat words missing from the lexicon",
    )
    p.add_argument(
        "--word-per-line",
        action="store_true",
        help="emit one word per output line (distillation input format)",
    )
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_segment_embed)

    p = commands.add_parser("distill", help="count a segmented corpus into a bigram model")
    p.add_argument("corpus", nargs="?", default="-", help="segmented corpus, one word per line")
    p.add_argument(
        "--separator",
        default=None,
        help="treat this token as a word delimiter instead of newlines",
    )
    p.add_argument("-o", "--output", required=True, help="model file to write")
    p.set_defaults(func=_cmd_distill)

    p = commands.add_parser("segment", help="segment running text with a bigram model")
    p.add_argument("corpus", nargs="?", default="-")
    p.add_argument("--model", required=True)
    p.add_argument("--beam", type=int, default=5, help="beam width")
    p.add_argument("--exact", action="store_true", help="use the exact dynamic program")
    p.add_argument("--word-per-line", action="store_true")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_segment)

    p = commands.add_parser("eval-boundaries", help="boundary precision/recall/F1")
    p.add_argument("--pred", required=True, help="predicted segmented lexicon")
    p.add_argument("--gold", required=True, help="gold segmented lexicon")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_eval_boundaries)

    p = commands.add_parser("eval-renyi", help="Renyi efficiency of a token stream")
    p.add_argument("tokens", nargs="?", default="-", help="tokenized text, space-separated")
    p.add_argument("--alpha", type=float, default=2.5)
    p.add_argument(
        "--vocab-size",
        type=int,
        default=None,
        help="normalizing vocabulary size; defaults to the observed type count",
    )
    p.add_argument(
        "--word-separator",
        default=None,
        help="separator token excluded from the frequency table",
    )
    p.add_argument(
        "--include-word-separator",
        action="store_true",
        help="count the separator token instead of excluding it",
    )
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_eval_renyi)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
