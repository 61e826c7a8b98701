# MIT License
#
# Copyright (c) 2021 The graspwire developers
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

"""
Command line front end.

Every subcommand writes its numeric results as ``<subcommand>.json`` to
the output directory, which defaults to ``$GRASPWIRE_OUTPUT_DIR`` or the
working directory.
"""

import argparse
import glob
import json
import logging
import os
import sys
from collections import namedtuple

import numpy as np

from . import images
from .checkpoint import load_checkpoint
from .checkpoint import save_checkpoint
from .codec import CodecConfig
from .codec import CodecModel
from .codec import decode
from .codec import encode
from .codec import ratio_grid
from .errors import Error
from .grasp.annotation import format_rect_annotations
from .grasp.annotation import load_dataset
from .grasp.detector import DetectorConfig
from .grasp.detector import DetectorTrainConfig
from .grasp.detector import detect
from .grasp.detector import load_detector
from .grasp.detector import save_detector
from .grasp.detector import train_detector
from .grasp.evaluate import evaluate_detector
from .grasp.evaluate import ratio_sweep
from .grasp.synthetic import make_scenes
from .metrics import MsSsimParams
from .metrics import PERFECT_MATCH
from .metrics import evaluate_pairs
from .metrics import score_pair
from .netproto.client import DEFAULT_TIMEOUT
from .netproto.client import request_grasp
from .netproto.frame import CompressedFrame
from .netproto.security import GAP_THRESHOLD
from .netproto.security import mismatch_gap
from .netproto.server import ServerConfig
from .netproto.server import serve
from .trainer import TrainConfig
from .trainer import train

LOGGER = logging.getLogger(__name__)

OUTPUT_DIR_VARIABLE = 'GRASPWIRE_OUTPUT_DIR'

RunConfig = namedtuple(
    'RunConfig',
    ['command', 'output_dir', 'seed', 'paths', 'codec', 'train']
)


def _address(text):
    host, sep, port = text.rpartition(':')

    if not sep or not port.isdigit():
        raise argparse.ArgumentTypeError('expected HOST:PORT, got {!r}'.format(text))

    return host or '127.0.0.1', int(port)


def _path_fields(args):
    names = (
        'images', 'pairs', 'dataset', 'model', 'foreign', 'detector', 'image',
        'frame', 'original', 'model_out', 'out', 'sweep'
    )
    return {
        name: getattr(args, name)
        for name in names
        if getattr(args, name, None) is not None
    }


def run_config_from_args(args):
    codec = None
    train_config = None

    if hasattr(args, 'latent_channels'):
        codec = CodecConfig(
            latent_channels=args.latent_channels,
            extra_downsample_stages=args.extra_stages,
            residual_blocks=args.residual_blocks,
            features=args.features)

    if hasattr(args, 'epochs'):
        train_config = TrainConfig(
            epochs=args.epochs,
            learning_rate=args.lr,
            batch_size=args.batch_size,
            log_every=args.log_every,
            lambda_adv=args.lambda_adv,
            alpha_mix=args.alpha_mix,
            seed=args.seed,
            max_steps=args.max_steps)

    return RunConfig(
        args.command, args.output_dir, getattr(args, 'seed', 0), _path_fields(args), codec, train_config)


def _run_config_dict(config):
    return {
        'command': config.command,
        'seed': config.seed,
        'paths': config.paths,
        'codec': config.codec.to_dict() if config.codec is not None else None,
        'train': config.train._asdict() if config.train is not None else None,
    }


def _write_json(config, name, payload):
    path = os.path.join(config.output_dir, name)
    document = dict(payload)
    document['run'] = _run_config_dict(config)

    with open(path, 'w') as fout:
        json.dump(document, fout, indent=2, sort_keys=True)
        fout.write('\n')

    LOGGER.info('Wrote %s.', path)
    return path


def _output_path(config, value, default):
    return value if value is not None else os.path.join(config.output_dir, default)


def _load_image_dir(directory):
    paths = sorted(glob.glob(os.path.join(directory, '*.png')))

    if not paths:
        raise Error('No PNG images in {}.'.format(directory))

    return np.stack([images.load_image(path) for path in paths])


def _load_images(args):
    if args.images is not None:
        return _load_image_dir(args.images)

    return images.synthetic_images(args.synthetic, seed=args.seed)


def cmd_synth(args, config):
    image_dir = os.path.join(config.output_dir, 'images')
    scene_dir = os.path.join(config.output_dir, 'scenes')

    for directory in (image_dir, scene_dir):
        os.makedirs(directory, exist_ok=True)

    for index, image in enumerate(images.synthetic_images(args.count, seed=args.seed)):
        images.save_image(os.path.join(image_dir, 'img{:04d}.png'.format(index)), image)

    index = {}

    for scene in make_scenes(args.scenes, seed=args.seed):
        images.save_image(os.path.join(scene_dir, scene.name + '.png'), scene.image)

        with open(os.path.join(scene_dir, scene.name + '.txt'), 'w') as fout:
            fout.write(format_rect_annotations(scene.truths))

        index[scene.name + '.png'] = {
            'annotations': scene.name + '.txt',
            'objects': [len(rects) for rects in scene.objects],
        }

    with open(os.path.join(scene_dir, 'index.json'), 'w') as fout:
        json.dump(index, fout, indent=2, sort_keys=True)

    _write_json(config, 'synth.json', {'images': args.count, 'scenes': args.scenes})
    return 0


def cmd_train_codec(args, config):
    data = _load_images(args)
    model, _, report = train(data, config.train, config.codec)
    model_path = _output_path(config, args.model_out, 'codec.gwm')
    save_checkpoint(model, model_path)
    report.write_jsonl(os.path.join(config.output_dir, 'train-codec.jsonl'))

    _write_json(config, 'train-codec.json', {
        'model_id': '{:016x}'.format(model.model_id),
        'compression_ratio': model.compression_ratio,
        'latent_shape': list(model.latent_shape),
        'log': report.to_dicts(),
    })
    return 0


def cmd_train_detector(args, config):
    scenes = load_dataset(args.dataset)
    train_config = DetectorTrainConfig(steps=args.steps, learning_rate=args.lr, seed=args.seed)
    model, history = train_detector(scenes, DetectorConfig(), train_config)
    model_path = _output_path(config, args.model_out, 'detector.gwd')
    save_detector(model, model_path)
    accuracy = evaluate_detector(model, scenes)

    _write_json(config, 'train-detector.json', {
        'model_id': '{:016x}'.format(model.model_id),
        'history': [{'step': step, 'loss': loss} for step, loss in history],
        'accuracy': accuracy.to_dict(),
    })
    return 0


def cmd_encode(args, config):
    model = load_checkpoint(args.model)
    frame = CompressedFrame.from_latent(encode(model, images.load_image(args.image)))
    out = _output_path(config, args.out, 'latent.gwf')

    with open(out, 'wb') as fout:
        fout.write(frame.encode())

    _write_json(config, 'encode.json', {
        'model_id': '{:016x}'.format(frame.model_id),
        'latent_shape': list(frame.shape),
        'wire_bytes': frame.wire_size,
        'compression_ratio': model.compression_ratio,
    })
    return 0


def cmd_decode(args, config):
    model = load_checkpoint(args.model)

    with open(args.frame, 'rb') as fin:
        frame = CompressedFrame.decode(fin.read())

    if frame.model_id != model.model_id:
        LOGGER.warning(
            'Frame was encoded for model 0x%016x, decoding with 0x%016x.',
            frame.model_id, model.model_id)

    recon = decode(model, frame.latent())
    out = _output_path(config, args.out, 'recon.png')
    images.save_image(out, recon)
    result = {'model_id': '{:016x}'.format(frame.model_id), 'matched': frame.model_id == model.model_id}

    if args.original is not None:
        row = score_pair(
            os.path.basename(args.original),
            images.denormalize(images.load_image(args.original)),
            images.denormalize(recon))
        result['psnr'] = None if row.psnr is PERFECT_MATCH else float(row.psnr)
        result['ssim'] = row.ssim
        result['ms_ssim'] = row.ms_ssim

    _write_json(config, 'decode.json', result)
    return 0


def cmd_eval_quality(args, config):
    report = evaluate_pairs(args.pairs, MsSsimParams(scales=args.scales))

    if args.out is not None:
        report.write_json(args.out)

    if args.csv is not None:
        report.write_csv(args.csv)

    _write_json(config, 'eval-quality.json', report.to_dict())
    return 0


def cmd_detect(args, config):
    detector = load_detector(args.detector)
    codec = load_checkpoint(args.model) if args.model is not None else None
    result = {}

    if args.image is not None:
        image = images.load_image(args.image)

        if codec is not None:
            image = decode(codec, encode(codec, image))

        result['candidates'] = [cand.to_dict() for cand in detect(detector, image)]

    if args.dataset is not None:
        scenes = load_dataset(args.dataset)
        result['accuracy'] = evaluate_detector(detector, scenes, codec).to_dict()

        if codec is not None:
            result['compression_ratio'] = codec.compression_ratio

        if args.sweep:
            points = ratio_sweep(detector, scenes, [load_checkpoint(path) for path in args.sweep])
            result['ratio_sweep'] = [point.to_dict() for point in points]
    elif args.sweep:
        raise Error('Expected --dataset with --sweep.')

    if not result:
        raise Error('Expected --image or --dataset.')

    _write_json(config, 'detect.json', result)
    return 0


def cmd_serve(args, config):
    serve(args.bind, args.model, args.detector, ServerConfig(args.max_frame_size, args.timeout))
    return 0


def cmd_request(args, config):
    response = request_grasp(args.server, args.model, images.load_image(args.image), args.timeout)
    result = response.to_dict()
    result['png_bytes'] = os.path.getsize(args.image)
    _write_json(config, 'request.json', result)

    if not response.ok:
        sys.stderr.write('graspwire: server replied {}: {}\n'.format(
            response.status.name, response.message or 'no message'))
        return 1

    return 0


def _format_ratio_table(entries):
    lines = ['{:>3} {:>5} {:>10} {:>9} {:>8} {:>10}'.format(
        'C', 'extra', 'latent', 'elements', 'ratio%', 'f32 bytes')]

    for e in entries:
        lines.append('{:>3} {:>5} {:>10} {:>9} {:>8.2f} {:>10}'.format(
            e.latent_channels, e.extra_downsample_stages,
            'x'.join(str(v) for v in e.latent_shape), e.latent_elements, e.ratio, e.bytes_f32))

    return '\n'.join(lines)


def cmd_bench(args, config):
    result = {}

    if args.ratio_grid:
        entries = ratio_grid()
        result['ratio_grid'] = [
            dict(e._asdict(), latent_shape=list(e.latent_shape)) for e in entries
        ]
        print(_format_ratio_table(entries))

    if args.image is not None:
        png_bytes = os.path.getsize(args.image)
        result['png_bytes'] = png_bytes
        result['wire_bytes'] = {
            '{:.2f}'.format(e.ratio): e.bytes_f32 for e in ratio_grid()
        }

    if not result:
        raise Error('Expected --ratio-grid or --image.')

    _write_json(config, 'bench.json', result)
    return 0


def cmd_mismatch_demo(args, config):
    data = _load_images(args)
    model = load_checkpoint(args.model)

    if args.foreign is not None:
        foreign = load_checkpoint(args.foreign)
    else:
        foreign = CodecModel(model.config, seed=args.seed + 1000)

    report = mismatch_gap(list(data), model, model, foreign, args.threshold)
    _write_json(config, 'mismatch-demo.json', report.to_dict())
    return 0


def _add_codec_flags(parser):
    parser.add_argument('--latent-channels', type=int, default=16)
    parser.add_argument('--extra-stages', type=int, default=0)
    parser.add_argument('--residual-blocks', type=int, default=3)
    parser.add_argument('--features', type=int, default=8)


def _add_image_source(parser, default_synthetic):
    group = parser.add_mutually_exclusive_group()
    group.add_argument('--images', help='directory of PNG images')
    group.add_argument(
        '--synthetic', type=int, default=default_synthetic,
        help='number of generated toy images when --images is absent')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='graspwire',
        description='Edge-cloud grasp detection over compressed image latents.')
    parser.add_argument(
        '--log-level', default='WARNING',
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'])
    parser.add_argument(
        '--output-dir', default=os.environ.get(OUTPUT_DIR_VARIABLE, '.'),
        help='where JSON results go (default ${})'.format(OUTPUT_DIR_VARIABLE))
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    p = sub.add_parser('synth', help='write a toy image set and grasp scene set')
    p.add_argument('--count', type=int, default=64)
    p.add_argument('--scenes', type=int, default=8)
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser('train-codec', help='train an encoder/decoder pair')
    _add_image_source(p, 64)
    _add_codec_flags(p)
    p.add_argument('--epochs', type=int, default=10)
    p.add_argument('--lr', type=float, default=2e-4)
    p.add_argument('--batch-size', type=int, default=30)
    p.add_argument('--log-every', type=int, default=50)
    p.add_argument('--lambda-adv', type=float, default=0.01)
    p.add_argument('--alpha-mix', type=float, default=0.84)
    p.add_argument('--max-steps', type=int)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--model-out')
    p.set_defaults(func=cmd_train_codec)

    p = sub.add_parser('train-detector', help='fit the grasp detector to a scene set')
    p.add_argument('--dataset', required=True, help='JSON scene index')
    p.add_argument('--steps', type=int, default=400)
    p.add_argument('--lr', type=float, default=1e-3)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--model-out')
    p.set_defaults(func=cmd_train_detector)

    p = sub.add_parser('encode', help='encode an image into a frame file')
    p.add_argument('--model', required=True)
    p.add_argument('--image', required=True)
    p.add_argument('--out')
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser('decode', help='reconstruct an image from a frame file')
    p.add_argument('--model', required=True)
    p.add_argument('--frame', required=True)
    p.add_argument('--original', help='score the reconstruction against this image')
    p.add_argument('--out')
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser('eval-quality', help='score original/reconstruction pairs')
    p.add_argument('--pairs', required=True)
    p.add_argument('--scales', type=int, default=3)
    p.add_argument('--out')
    p.add_argument('--csv')
    p.set_defaults(func=cmd_eval_quality)

    p = sub.add_parser('detect', help='detect grasps in an image or a scene set')
    p.add_argument('--detector', required=True)
    p.add_argument('--image')
    p.add_argument('--model', help='pass images through this codec first')
    p.add_argument('--dataset')
    p.add_argument(
        '--sweep', nargs='+', metavar='CODEC',
        help='also score the dataset after a round trip through each codec')
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser('serve', help='run the cloud server')
    p.add_argument('--bind', type=_address, default=('127.0.0.1', 7341))
    p.add_argument('--model', required=True, help='codec checkpoint with the decoder')
    p.add_argument('--detector', required=True)
    p.add_argument('--max-frame-size', type=int, default=ServerConfig().max_frame_size)
    p.add_argument('--timeout', type=float, default=ServerConfig().timeout)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser('request', help='send one image to a server')
    p.add_argument('--server', type=_address, required=True)
    p.add_argument('--model', required=True, help='codec checkpoint with the encoder')
    p.add_argument('--image', required=True)
    p.add_argument('--timeout', type=float, default=DEFAULT_TIMEOUT)
    p.set_defaults(func=cmd_request)

    p = sub.add_parser('bench', help='compression ratio and wire size tables')
    p.add_argument('--ratio-grid', action='store_true')
    p.add_argument('--image', help='compare wire sizes with this PNG file')
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser('mismatch-demo', help='SSIM gap between paired and foreign decoders')
    p.add_argument('--model', required=True)
    p.add_argument('--foreign', help='foreign codec checkpoint, default a fresh one')
    _add_image_source(p, 10)
    p.add_argument('--threshold', type=float, default=GAP_THRESHOLD)
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(func=cmd_mismatch_demo)

    return parser


def run(argv=None):
    """Run one subcommand and return the process exit status."""
    parser = build_parser()

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    try:
        config = run_config_from_args(args)
        os.makedirs(config.output_dir, exist_ok=True)
        return args.func(args, config)
    except (Error, OSError) as e:
        sys.stderr.write('graspwire: error: {}\n'.format(e))
        return 1


def main():
    sys.exit(run(sys.argv[1:]))
