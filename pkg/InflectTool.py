# Copyright 2025 The Inflect Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Intonation toolkit command line

Classifies text into statement / normal question / declarative question,
renders F0 contours with or without a rising boundary tone, and evaluates the
intonation of synthesized audio against references (DTW over mel-cepstra,
F0 frame error, rising-intonation detection).

Exit codes: 0 success, 1 usage error, 2 data error.
"""
import argparse
import csv
import json
import logging
import re
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from inflect_align import write_path_csv
from inflect_classifier import (DEFAULT_ATTENTION_DIM, DEFAULT_CLASS_WEIGHTS, DEFAULT_EMBED_DIM,
                                DEFAULT_INTONATION_DIM, TrainConfig, check_gradients, evaluate_accuracy,
                                init_params, intonation_lookup, intonation_type, load_checkpoint,
                                load_embedding_tsv, predict, save_checkpoint, train)
from inflect_contour import (DEFAULT_HARMONICS, ContourSpec, duration_for_text, make_synthetic_dataset,
                             render_contour, tone_from_contour, write_synthetic_corpus)
from inflect_corpus import (SentenceType, corpus_stats, filter_utterances, parse_manifest,
                            stratified_split, strip_end_punctuation, write_manifest)
from inflect_metrics import (BatchItem, RiseConfig, UndecidableRiseError, detect_rising, evaluate_batch,
                             perception_accuracy, write_batch_csv, write_json)
from inflect_pitch import PitchConfig, extract_f0, write_pitch_csv
from inflect_signal import (DEFAULT_SAMPLE_RATE, SpectralConfig, load_audio, mel_cepstra, mel_spectrogram,
                            dump_matrix, write_audio)

logger = logging.getLogger("inflect")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ==============================================================================
# Shared flag groups
# ==============================================================================

def add_spectral_args(p):
    d = SpectralConfig()
    g = p.add_argument_group('spectral front-end')
    g.add_argument('--frame-length', type=int, default=d.frame_length, help='Analysis frame (samples)')
    g.add_argument('--hop-length', type=int, default=d.hop_length, help='Hop (samples)')
    g.add_argument('--fft-size', type=int, default=d.fft_size, help='FFT size (samples)')
    g.add_argument('--mel-bands', type=int, default=d.mel_bands, help='Number of mel bands')
    g.add_argument('--fmin', type=float, default=d.fmin, help='Lowest filterbank frequency (Hz)')
    g.add_argument('--fmax', type=float, default=d.fmax, help='Highest filterbank frequency (Hz, default Nyquist)')
    g.add_argument('--cepstral-order', type=int, default=d.cepstral_order, help='Mel-cepstral coefficients c_1..c_K')


def spectral_from_args(args):
    return SpectralConfig(frame_length=args.frame_length, hop_length=args.hop_length, fft_size=args.fft_size,
                          mel_bands=args.mel_bands, fmin=args.fmin, fmax=args.fmax,
                          cepstral_order=args.cepstral_order)


def add_pitch_args(p):
    d = PitchConfig()
    g = p.add_argument_group('pitch')
    g.add_argument('--f0-min', type=float, default=d.fmin_search, help='Lowest F0 searched (Hz)')
    g.add_argument('--f0-max', type=float, default=d.fmax_search, help='Highest F0 searched (Hz)')
    g.add_argument('--yin-threshold', type=float, default=d.threshold, help='YIN voicing threshold')


def pitch_from_args(args):
    return PitchConfig(args.f0_min, args.f0_max, args.yin_threshold)


def add_rise_args(p):
    d = RiseConfig()
    g = p.add_argument_group('rising detection')
    g.add_argument('--tail-fraction', type=float, default=d.tail_fraction, help='Final fraction of frames compared')
    g.add_argument('--rise-threshold', type=float, default=d.rise_ratio_threshold, help='Tail/body median ratio')
    g.add_argument('--min-voiced-tail', type=int, default=d.min_voiced_tail, help='Voiced frames needed per region')


def rise_from_args(args):
    return RiseConfig(args.tail_fraction, args.rise_threshold, args.min_voiced_tail)


def add_contour_args(p):
    d = ContourSpec()
    g = p.add_argument_group('contour rendering')
    g.add_argument('--base-f0', type=float, default=d.base_f0, help='Starting F0 (Hz)')
    g.add_argument('--declination', type=float, default=d.declination, help='F0 slope (Hz/s)')
    g.add_argument('--rise-onset', type=float, default=d.rise_onset_fraction, help='Boundary tone onset fraction')
    g.add_argument('--rise-ratio', type=float, default=d.rise_ratio, help='Boundary tone peak ratio')
    g.add_argument('--jitter-std', type=float, default=d.jitter_std, help='Gaussian F0 jitter (Hz)')
    g.add_argument('--harmonics', type=int, default=DEFAULT_HARMONICS, help='Harmonics in the rendered tone')
    g.add_argument('--sample-rate', type=int, default=DEFAULT_SAMPLE_RATE, help='Output sample rate (Hz)')


def add_exclude_arg(p):
    p.add_argument('--exclude-pattern', type=str, default=None,
                   help='Drop utterances whose text matches this regular expression')


def effective_config(args, **configs):
    """Flags plus resolved dataclass configs, JSON-ready"""
    flags = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k != 'func'}
    resolved = {name: asdict(cfg) for name, cfg in configs.items()}
    return {'flags': flags, **resolved}


def load_corpus(args):
    utts = parse_manifest(args.manifest)
    if getattr(args, 'exclude_pattern', None):
        pattern = re.compile(args.exclude_pattern)
        utts = filter_utterances(utts, lambda u: not pattern.search(u.text))
    return utts


# ==============================================================================
# Rendering pipeline shared by say and perception
# ==============================================================================

def speak(text, params, label=None, contour=None, sample_rate=DEFAULT_SAMPLE_RATE,
          harmonics=DEFAULT_HARMONICS, spectral=None, pitch=None, rise=None):
    """
    predict (unless a label is given) -> intonation lookup -> contour -> tone,
    followed by a rising-detection self-check on the rendered audio
    """
    spectral = spectral or SpectralConfig()
    pitch = pitch or PitchConfig()
    contour = contour or ContourSpec()
    probs = None
    if label is None:
        label, probs, _ = predict(text, params)
        source = 'predicted'
    else:
        source = 'given'

    rendered_as = intonation_type(intonation_lookup(label, params), params)
    spec = ContourSpec(base_f0=contour.base_f0, declination=contour.declination,
                       duration=duration_for_text(text), rise_onset_fraction=contour.rise_onset_fraction,
                       rise_ratio=contour.rise_ratio, jitter_std=contour.jitter_std, seed=contour.seed)
    track = render_contour(spec, rendered_as, spectral.hop_length / sample_rate)
    audio = tone_from_contour(track, sample_rate, harmonics, spectral.frame_length)

    try:
        verdict = detect_rising(extract_f0(audio, pitch.search_range, pitch.threshold, spectral), rise)
        rising, ratio = verdict.is_rising, verdict.rise_ratio
    except UndecidableRiseError as e:
        logger.warning("%s", e)
        rising, ratio = None, None

    result = {
        'text': text,
        'label': SentenceType(label).tag,
        'label_source': source,
        'rendered_as': rendered_as.tag,
        'rise_detected': rising,
        'rise_ratio': ratio,
    }
    if probs is not None:
        result['probs'] = [float(p) for p in probs]
    return result, audio


def contour_from_args(args, seed=None):
    return ContourSpec(base_f0=args.base_f0, declination=args.declination, duration=1.0,
                       rise_onset_fraction=args.rise_onset, rise_ratio=args.rise_ratio,
                       jitter_std=args.jitter_std, seed=args.seed if seed is None else seed)


# ==============================================================================
# Commands
# ==============================================================================

def cmd_eval(args):
    spectral, pitch, rise = spectral_from_args(args), pitch_from_args(args), rise_from_args(args)
    utts = load_corpus(args)
    ref_dir, hyp_dir = Path(args.ref_dir), Path(args.hyp_dir)

    # every pair must resolve before anything is computed or written
    items = []
    for u in utts:
        ref, hyp = ref_dir / f"{u.id}.wav", hyp_dir / f"{u.id}.wav"
        for side, p in (('reference', ref), ('hypothesis', hyp)):
            if not p.is_file():
                raise FileNotFoundError(f"Missing {side} audio for id '{u.id}': {p}")
        items.append(BatchItem(u.id, u.label, str(ref), str(hyp)))

    result = evaluate_batch(items, spectral, pitch, rise, args.deviation_tol,
                            workers=args.workers, progress=not args.no_progress)

    out_dir = Path(args.out_dir)
    write_batch_csv(result.rows, out_dir / 'batch.csv')
    for row in result.rows:
        pair = {'id': row['id'], 'class': row['class'], **result.reports[row['id']].to_dict()}
        write_json(pair, out_dir / 'pairs' / f"{row['id']}.json")
        if args.dump_paths:
            write_path_csv(result.paths[row['id']], out_dir / 'paths' / f"{row['id']}.csv")
    write_json({'summary': result.summary,
                'config': effective_config(args, spectral=spectral, pitch=pitch, rise=rise)},
               out_dir / 'summary.json')

    print(f"{'':8s}{'Sta':>10s}{'Que':>10s}{'DecQue':>10s}{'All':>10s}")
    for metric in ('ffe', 'gpe', 'vde', 'mean_mcd'):
        cells = []
        for name in ('Sta', 'Que', 'DecQue', 'All'):
            value = result.summary[name][metric]
            cells.append(f"{'-':>10s}" if value is None else
                         (f"{value:>10.2f}" if metric == 'mean_mcd' else f"{100 * value:>9.2f}%"))
        print(f"{metric:8s}" + ''.join(cells))
    print(f"Evaluated {len(result.rows)} pairs -> {out_dir}")
    return EXIT_OK


def cmd_train(args):
    utts = load_corpus(args)
    if not utts:
        raise ValueError(f"Manifest {args.manifest} has no utterances to train on")
    if args.augment_strip_punct:
        utts = utts + strip_end_punctuation(utts)
    dataset = [(u.text, u.label) for u in utts]

    cfg = TrainConfig(learning_rate=args.learning_rate, batch_size=args.batch_size, epochs=args.epochs,
                      class_weights=tuple(args.class_weights), seed=args.seed,
                      freeze_embedder=args.freeze_embeddings, embed_dim=args.embed_dim,
                      attention_dim=args.attention_dim, intonation_dim=args.intonation_dim)
    start = None
    if args.embeddings:
        embedder = load_embedding_tsv(args.embeddings, seed=args.seed)
        start = init_params(embedder.tokens, attention_dim=cfg.attention_dim, intonation_dim=cfg.intonation_dim,
                            seed=cfg.seed, embedding=embedder.matrix)

    params, history = train(dataset, cfg, start)
    accuracy = evaluate_accuracy(params, dataset)

    extra = {'augment_strip_punct': args.augment_strip_punct, 'examples': len(dataset),
             'embeddings': bool(args.embeddings), 'exclude_pattern': args.exclude_pattern,
             'final_accuracy': accuracy}
    save_checkpoint(params, args.out, cfg, extra)

    history_path = Path(args.history) if args.history else Path(args.out).with_suffix('.history.csv')
    history_path.parent.mkdir(parents=True, exist_ok=True)
    with open(history_path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['epoch', 'loss', 'accuracy'])
        for epoch, (loss, acc) in enumerate(zip(history.loss, history.accuracy), start=1):
            writer.writerow([epoch, repr(loss), repr(acc)])

    if args.plot:
        from inflect_plots import plot_history
        plot_history(history, args.plot)

    final_loss = history.loss[-1] if history.loss else float('nan')
    print(f"Trained on {len(dataset)} examples for {cfg.epochs} epochs; "
          f"final loss {final_loss:.4f}, train accuracy {100 * accuracy['All']:.2f}%")
    print(f"Checkpoint: {args.out}")
    return EXIT_OK


def cmd_classify(args):
    params = load_checkpoint(args.checkpoint)
    if args.text is not None:
        entries = [('text', args.text, None)]
    else:
        entries = [(u.id, u.text, u.label) for u in load_corpus(args)]

    predictions = []
    for utt_id, text, _ in entries:
        label, probs, alpha = predict(text, params)
        predictions.append({'id': utt_id, 'predicted': label.tag,
                            'probs': [float(p) for p in probs], 'alpha': [float(a) for a in alpha]})

    report = {'predictions': predictions, 'config': effective_config(args)}
    labeled = [(text, true) for _, text, true in entries if true is not None]
    if labeled:
        report['accuracy'] = evaluate_accuracy(params, labeled)
        print(f"Accuracy: {100 * report['accuracy']['All']:.2f}% over {len(labeled)} utterances")

    if args.out:
        write_json(report, args.out)
    else:
        print(json.dumps(predictions, ensure_ascii=False, indent=2))
    return EXIT_OK


def cmd_say(args):
    params = load_checkpoint(args.checkpoint)
    label = SentenceType.from_tag(args.label) if args.label else None
    spectral, pitch, rise = spectral_from_args(args), pitch_from_args(args), rise_from_args(args)
    result, audio = speak(args.text, params, label, contour_from_args(args), args.sample_rate, args.harmonics,
                          spectral, pitch, rise)

    write_audio(args.out, audio)
    result['audio'] = str(args.out)
    result['config'] = effective_config(args, spectral=spectral, pitch=pitch, rise=rise)
    if args.json:
        write_json(result, args.json)
    print(json.dumps({k: v for k, v in result.items() if k != 'config'}, ensure_ascii=False))
    return EXIT_OK


def cmd_perception(args):
    params = load_checkpoint(args.checkpoint)
    spectral, pitch, rise = spectral_from_args(args), pitch_from_args(args), rise_from_args(args)
    forced = SentenceType.from_tag(args.force_label) if args.force_label else None

    allowed = (SentenceType.STATEMENT, SentenceType.DECLARATIVE_QUESTION)
    utts = sorted((u for u in load_corpus(args) if u.label in allowed), key=lambda u: u.id)
    if not utts:
        raise ValueError(f"Manifest {args.manifest} has no statements or declarative questions")

    verdicts, rows = [], []
    for k, u in enumerate(utts):
        result, _ = speak(u.text, params, forced, contour_from_args(args, seed=args.seed + k),
                          args.sample_rate, args.harmonics, spectral, pitch, rise)
        # an undecidable contour is heard as a statement
        verdicts.append((bool(result['rise_detected']), u.label))
        rows.append({'id': u.id, 'class': u.label.short, 'label': result['label'],
                     'rise_detected': result['rise_detected'], 'rise_ratio': result['rise_ratio']})

    accuracy = perception_accuracy(verdicts)
    write_json({'accuracy': accuracy, 'rows': rows,
                'config': effective_config(args, spectral=spectral, pitch=pitch, rise=rise)}, args.out)
    cells = ['-' if accuracy[c] is None else f"{100 * accuracy[c]:.2f}%" for c in ('Sta', 'DecQue', 'All')]
    print(f"Perception accuracy  Sta {cells[0]}  DecQue {cells[1]}  All {cells[2]}")
    return EXIT_OK


def cmd_f0(args):
    spectral, pitch = spectral_from_args(args), pitch_from_args(args)
    audio = load_audio(args.audio)
    track = extract_f0(audio, pitch.search_range, pitch.threshold, spectral)
    write_pitch_csv(track, args.out)

    if args.plot or args.dump_mel or args.dump_cepstra:
        mel = mel_spectrogram(audio, spectral)
        if args.dump_mel:
            dump_matrix(args.dump_mel, mel)
        if args.dump_cepstra:
            dump_matrix(args.dump_cepstra, mel_cepstra(mel, spectral.cepstral_order).coefficients)
        if args.plot:
            from inflect_plots import plot_pitch_over_mel
            plot_pitch_over_mel(mel, track, args.plot, audio.sample_rate, title=Path(args.audio).name)

    voiced = track.f0[track.voiced]
    median = f"{np.median(voiced):.1f} Hz" if voiced.size else "n/a"
    print(f"{len(track)} frames, {100 * track.voiced_fraction:.1f}% voiced, median F0 {median}")
    return EXIT_OK


def cmd_synth_corpus(args):
    render_as = SentenceType.from_tag(args.render_as) if args.render_as else None
    spectral = spectral_from_args(args)
    items = make_synthetic_dataset(args.n_per_class, seed=args.seed, jitter_std=args.jitter_std,
                                   render_as=render_as, sample_rate=args.sample_rate,
                                   harmonics=args.harmonics, spectral=spectral, progress=not args.no_progress)
    manifest = write_synthetic_corpus(args.out_dir, items)
    print(f"Wrote {len(items)} utterances to {manifest}")
    return EXIT_OK


def cmd_stats(args):
    stats = corpus_stats(load_corpus(args))
    if args.out:
        write_json({'stats': stats, 'config': effective_config(args)}, args.out)
    print(json.dumps(stats, ensure_ascii=False, sort_keys=True))
    return EXIT_OK


def cmd_split(args):
    split = stratified_split(load_corpus(args), args.test_fraction, args.seed)
    write_manifest(split.train, args.train_out)
    write_manifest(split.test, args.test_out)
    stats = {'train': corpus_stats(split.train), 'test': corpus_stats(split.test)}
    if args.stats_out:
        write_json({'stats': stats, 'config': effective_config(args)}, args.stats_out)
    print(f"train {stats['train']['counts']}  test {stats['test']['counts']}")
    return EXIT_OK


def cmd_check_grad(args):
    rng = np.random.default_rng(args.seed)
    alphabet = list("他去学校。？不吗")
    worst = 0.0
    failures = 0
    for k in range(args.configs):
        texts = [''.join(rng.choice(alphabet, size=rng.integers(1, 5))) for _ in range(rng.integers(1, 4))]
        batch = [(t, SentenceType(int(rng.integers(3)))) for t in texts]
        params = init_params(['[CLS]', '[UNK]'] + alphabet, embed_dim=4, attention_dim=3, intonation_dim=2,
                             seed=int(rng.integers(2 ** 31)))
        # push parameters away from the near-linear init regime
        for block in (params.embedder.matrix, params.pooling.W, params.pooling.b, params.pooling.v,
                      params.head_W, params.head_b):
            block *= 10.0
        weights = tuple(float(w) for w in rng.uniform(0.5, 20.0, size=3))
        errors = check_gradients(params, batch, weights, eps=args.eps)
        err = max(errors.values())
        worst = max(worst, err)
        failures += int(err >= args.tolerance)
        logger.debug("config %d max relative error %.3e", k, err)

    report = {'configs': args.configs, 'max_relative_error': worst, 'failures': failures,
              'tolerance': args.tolerance, 'config': effective_config(args)}
    if args.out:
        write_json(report, args.out)
    print(f"{args.configs} configurations, max relative error {worst:.3e}, {failures} above {args.tolerance:g}")
    return EXIT_OK if failures == 0 else EXIT_DATA


# ==============================================================================
# Parser
# ==============================================================================

def build_parser():
    parser = ArgumentParser(prog='InflectTool', description=__doc__.strip().splitlines()[0])
    parser.add_argument('-v', '--verbose', action='store_true', help='Debug logging')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('eval', help='FFE/GPE/VDE/MCD of hypothesis audio against references')
    p.add_argument('--ref-dir', required=True, help='Directory of reference <id>.wav')
    p.add_argument('--hyp-dir', required=True, help='Directory of hypothesis <id>.wav')
    p.add_argument('--manifest', required=True, help='TSV manifest naming the ids and classes')
    p.add_argument('--out-dir', required=True, help='Where batch.csv, summary.json and pairs/ go')
    p.add_argument('--workers', type=int, default=1, help='Concurrent pair evaluations')
    p.add_argument('--deviation-tol', type=float, default=0.20, help='Relative F0 deviation counted as gross')
    p.add_argument('--dump-paths', action='store_true', help='Also write DTW paths as CSV')
    p.add_argument('--no-progress', action='store_true', help='Hide the progress bar')
    add_exclude_arg(p)
    add_spectral_args(p)
    add_pitch_args(p)
    add_rise_args(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser('train', help='Train the sentence-type classifier')
    p.add_argument('--manifest', required=True, help='TSV manifest (audio column optional)')
    p.add_argument('--out', required=True, help='Checkpoint JSON path')
    p.add_argument('--history', default=None, help='History CSV (default: <out>.history.csv)')
    p.add_argument('--learning-rate', type=float, default=TrainConfig.learning_rate)
    p.add_argument('--batch-size', type=int, default=TrainConfig.batch_size)
    p.add_argument('--epochs', type=int, default=TrainConfig.epochs)
    p.add_argument('--class-weights', type=float, nargs=3, default=list(DEFAULT_CLASS_WEIGHTS),
                   metavar=('STA', 'QUE', 'DECQ'), help='Cross-entropy class weights')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--freeze-embeddings', action='store_true', help='Keep token embeddings fixed')
    p.add_argument('--embed-dim', type=int, default=DEFAULT_EMBED_DIM)
    p.add_argument('--attention-dim', type=int, default=DEFAULT_ATTENTION_DIM)
    p.add_argument('--intonation-dim', type=int, default=DEFAULT_INTONATION_DIM)
    p.add_argument('--embeddings', default=None, help='Precomputed token vectors (TSV: token + floats)')
    p.add_argument('--augment-strip-punct', action='store_true',
                   help='Add copies without end punctuation (declarative questions become statements)')
    p.add_argument('--plot', default=None, help='Save loss/accuracy curves to this PNG')
    add_exclude_arg(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser('classify', help='Predict sentence types')
    p.add_argument('--checkpoint', required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument('--manifest', help='TSV manifest to classify')
    group.add_argument('--text', help='A single sentence')
    p.add_argument('--out', default=None, help='Prediction JSON (default: print)')
    add_exclude_arg(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser('say', help='Render a sentence with type-conditioned intonation')
    p.add_argument('--text', required=True)
    p.add_argument('--checkpoint', required=True)
    p.add_argument('--label', choices=['sta', 'que', 'decq'], default=None,
                   help='Ground-truth sentence type; skips the classifier')
    p.add_argument('--out', required=True, help='Output WAV')
    p.add_argument('--json', default=None, help='Also write the result JSON here')
    p.add_argument('--seed', type=int, default=0, help='Jitter seed')
    add_contour_args(p)
    add_spectral_args(p)
    add_pitch_args(p)
    add_rise_args(p)
    p.set_defaults(func=cmd_say)

    p = sub.add_parser('perception', help='Automated Sta vs DecQue perception test of the say pipeline')
    p.add_argument('--manifest', required=True)
    p.add_argument('--checkpoint', required=True)
    p.add_argument('--out', required=True, help='Report JSON')
    p.add_argument('--force-label', choices=['sta', 'que', 'decq'], default=None,
                   help='Render every sentence as this type (no-conditioning baseline)')
    p.add_argument('--seed', type=int, default=0, help='Base jitter seed')
    add_exclude_arg(p)
    add_contour_args(p)
    add_spectral_args(p)
    add_pitch_args(p)
    add_rise_args(p)
    p.set_defaults(func=cmd_perception)

    p = sub.add_parser('f0', help='Extract a pitch track to CSV')
    p.add_argument('--audio', required=True, help='Mono PCM16 WAV')
    p.add_argument('--out', required=True, help='Pitch CSV')
    p.add_argument('--plot', default=None, help='PNG of the mel spectrogram with the F0 contour')
    p.add_argument('--dump-mel', default=None, help='Prefix for the log-mel binary + JSON sidecar')
    p.add_argument('--dump-cepstra', default=None, help='Prefix for the mel-cepstra binary + JSON sidecar')
    add_spectral_args(p)
    add_pitch_args(p)
    p.set_defaults(func=cmd_f0)

    p = sub.add_parser('synth-corpus', help='Generate the toy-grammar corpus with rendered audio')
    p.add_argument('--out-dir', required=True)
    p.add_argument('--n-per-class', type=int, default=10)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--jitter-std', type=float, default=0.0)
    p.add_argument('--render-as', choices=['sta', 'que', 'decq'], default=None,
                   help='Render every contour as this type while keeping true labels')
    p.add_argument('--harmonics', type=int, default=DEFAULT_HARMONICS)
    p.add_argument('--sample-rate', type=int, default=DEFAULT_SAMPLE_RATE)
    p.add_argument('--no-progress', action='store_true')
    add_spectral_args(p)
    p.set_defaults(func=cmd_synth_corpus)

    p = sub.add_parser('stats', help='Per-class counts and ratios of a manifest')
    p.add_argument('--manifest', required=True)
    p.add_argument('--out', default=None, help='Stats JSON')
    add_exclude_arg(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser('split', help='Stratified train/test split of a manifest')
    p.add_argument('--manifest', required=True)
    p.add_argument('--test-fraction', type=float, default=0.1)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--train-out', required=True)
    p.add_argument('--test-out', required=True)
    p.add_argument('--stats-out', default=None)
    add_exclude_arg(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser('check-grad', help='Finite-difference check of the classifier gradients')
    p.add_argument('--configs', type=int, default=50)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--eps', type=float, default=1e-5)
    p.add_argument('--tolerance', type=float, default=1e-4)
    p.add_argument('--out', default=None)
    p.set_defaults(func=cmd_check_grad)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == '__main__':
    sys.exit(main())
