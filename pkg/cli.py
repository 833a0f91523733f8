"""
Batch front-end: build a space, run one pipeline, write JSON/CSV/Markdown
artifacts and print the headline result on stdout.

    python run.py eval --space f2:radius=6 --w ab --W 1 --g ababab
    python run.py delta --space f2:radius=4 --triples all
    python run.py certificate --g1 a --g2 b --schedule default --count 2
"""
import argparse
import json
import logging
import sys
import traceback
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from models.errors import QuasimorphismError
from models.group_element import Slope, parse_group_element
from models.space import Space, Walk
from models.word import Word
from services.axis_service import AxisService
from services.brute_force_oracle import BruteForceOracle
from services.counting_service import (CountingFunctional, CountingService, OracleMismatchError,
                                       QMDescriptor)
from services.family_service import ExponentSchedule, FamilyService
from services.graph_inspector import GraphInspector, sample_triples
from services.group_action import GroupActionService
from services.report_writer import ReportWriter
from services.space_builder import SpaceBuilder

logger = logging.getLogger(__name__)

PIPELINES = ('eval', 'defect', 'growth', 'certificate', 'wpd', 'delta', 'farey-stab')

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ASSERTION = 2


class UsageError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name


@dataclass
class RunConfig:
    pipeline: str
    space: str = "f2:radius=4"
    w: Optional[str] = None
    W: int = Config.DEFAULT_W
    basepoint: Optional[str] = None
    g: Optional[str] = None
    n_max: int = 5
    pair_radius: int = 1
    triples: str = "all"
    g1: Optional[str] = None
    g2: Optional[str] = None
    schedule: str = "default"
    count: int = 2
    powers: Optional[str] = None
    commutator: Optional[str] = None
    balanced: bool = False
    C: float = 2.0
    N: int = 3
    enum_bound: int = 6
    translate_bound: int = 2
    a: Optional[str] = None
    b: Optional[str] = None
    oracle: bool = False
    budget_cap: int = Config.WALK_BUDGET_CAP
    output_dir: str = Config.OUTPUT_DIR
    seed: int = Config.RANDOM_SEED

    def validate(self):
        if self.pipeline not in PIPELINES:
            raise UsageError('pipeline', f"unknown pipeline {self.pipeline!r}; choose from {', '.join(PIPELINES)}")
        for name in ('W', 'n_max', 'count', 'N', 'budget_cap'):
            if getattr(self, name) <= 0:
                raise UsageError(name, f"must be positive, got {getattr(self, name)}")
        for name in ('pair_radius', 'enum_bound', 'translate_bound', 'seed'):
            if getattr(self, name) < 0:
                raise UsageError(name, f"must be >= 0, got {getattr(self, name)}")
        if self.C < 0:
            raise UsageError('C', f"must be >= 0, got {self.C}")

    @classmethod
    def from_json(cls, path: str, overrides: Optional[Dict[str, Any]] = None) -> 'RunConfig':
        with open(path, encoding='utf-8') as handle:
            document = json.load(handle)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(document) - known)
        if unknown:
            raise UsageError(unknown[0], "unknown configuration field")
        document.update(overrides or {})
        return cls(**document)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# ----------------------------------------------------------------------
# parsing helpers
# ----------------------------------------------------------------------
def parse_space_spec(text: str) -> Tuple[str, Dict[str, str]]:
    """'f2:radius=6' or 'farey:Q=60,center=0/1'"""
    kind, _, rest = text.partition(':')
    params = {}
    for item in filter(None, rest.split(',')):
        key, sep, value = item.partition('=')
        if not sep:
            raise UsageError('space', f"expected key=value, got {item!r}")
        params[key.strip()] = value.strip()
    return kind.strip().lower(), params


def build_space(text: str, builder: Optional[SpaceBuilder] = None) -> Space:
    builder = builder or SpaceBuilder()
    kind, params = parse_space_spec(text)
    try:
        if kind.startswith('f') and kind[1:].isdigit():
            return builder.build_free_tree_ball(int(kind[1:]), int(params.get('radius', 4)))
        if kind == 'farey':
            center = Slope.parse(params['center']) if 'center' in params else None
            return builder.build_farey_ball(int(params.get('Q', 20)), center)
        if kind == 'cycle':
            return builder.build_cycle(int(params.get('n', 12)))
    except (KeyError, TypeError) as e:
        raise UsageError('space', f"bad parameters in {text!r}: {e}")
    except ValueError as e:
        if isinstance(e, QuasimorphismError):
            raise
        raise UsageError('space', str(e))
    raise UsageError('space', f"unknown space kind {kind!r}")


def default_basepoint(space: Space) -> int:
    if space.is_farey:
        return space.vertex(Slope.parse(space.truncation['center']))
    if space.is_free_tree:
        return space.vertex(Word.identity())
    return 0


def parse_vertex(space: Space, text: Optional[str]) -> int:
    if text is None:
        return default_basepoint(space)
    if space.is_farey:
        label: Any = Slope.parse(text)
    elif space.is_free_tree:
        label = Word.parse(text)
    else:
        label = int(text)
    vertex = space.find(label)
    if vertex is None:
        raise UsageError('basepoint', f"{text} is not a vertex of {space.metadata}")
    return vertex


def require(config: RunConfig, *names: str):
    for name in names:
        if getattr(config, name) in (None, ""):
            raise UsageError(name, f"required by the {config.pipeline} pipeline")


def build_functional(config: RunConfig, space: Space, action: GroupActionService) -> CountingFunctional:
    """Words on trees; on other spaces --w is a walk of vertex labels whose translates are the copies"""
    require(config, 'w')
    if space.is_free_tree:
        return CountingFunctional.for_word(Word.parse(config.w), config.W)
    vertices = tuple(parse_vertex(space, item) for item in config.w.split(','))
    walk = Walk(vertices)
    translates = action.enumerate_translates(walk, config.translate_bound)
    return CountingFunctional.for_translates(translates, config.W)


# ----------------------------------------------------------------------
# pipelines
# ----------------------------------------------------------------------
class PipelineRunner:
    """Runs one pipeline and returns a result dictionary"""

    def __init__(self, config: RunConfig):
        self.config = config
        self.writer = ReportWriter(config.output_dir)
        self.builder = SpaceBuilder()

    def run(self) -> Dict[str, Any]:
        handler = getattr(self, '_run_' + self.config.pipeline.replace('-', '_'))
        logger.info(f"Starting pipeline {self.config.pipeline}")
        return handler()

    def _envelope(self, result: Dict[str, Any], space: Optional[Space] = None) -> Dict[str, Any]:
        if space is not None:
            result.setdefault('space', {'metadata': space.metadata, 'truncation': space.truncation,
                                        'vertices': space.num_vertices})
        return self.writer.envelope(self.config.pipeline, self.config.to_dict(), result)

    def _counting_context(self):
        space = build_space(self.config.space, self.builder)
        counter = CountingService(space, budget_cap=self.config.budget_cap)
        functional = build_functional(self.config, space, counter.action)
        desc = QMDescriptor(functional, parse_vertex(space, self.config.basepoint), space)
        oracle = BruteForceOracle(space, counter.inspector) if self.config.oracle else None
        return space, counter, desc, oracle

    def _run_eval(self) -> Dict[str, Any]:
        require(self.config, 'g')
        space, counter, desc, oracle = self._counting_context()
        g = parse_group_element(self.config.g)
        y = counter.action.apply_action(g, desc.basepoint)
        forward = counter.cw_value(desc.functional, desc.basepoint, y)
        backward = counter.cw_value(desc.functional.inverse(), desc.basepoint, y)
        oracle_checked = counter.cross_check(oracle, desc, g) if oracle else False
        value = counter.hw_value(desc, g)
        result = {
            'h_value': value,
            'c_w': forward.value,
            'c_w_inverse': backward.value,
            'distance': forward.distance,
            'walk_budget': forward.budget,
            'witness': [str(space.label(v)) for v in forward.walk.vertices],
            'selected_copies': list(forward.copies),
            'functional': desc.functional.describe(),
            'exact': forward.exact and backward.exact,
            'c_bound': 'exact' if forward.exact and backward.exact else 'lower',
            'oracle_checked': oracle_checked,
        }
        self.writer.write_json('eval.json', self._envelope(result, space))
        return {'success': True, 'summary': str(value), 'result': result}

    def _run_defect(self) -> Dict[str, Any]:
        space, counter, desc, _ = self._counting_context()
        elements = counter.action.enumerate_group_elements(self.config.pair_radius)
        pairs = [(g1, g2) for g1 in elements for g2 in elements]
        report = counter.defect_estimate(desc, pairs, sample_spec=f"all pairs within bound {self.config.pair_radius}",
                                         skip_outside=True)
        result = report.to_dict()
        result['functional'] = desc.functional.describe()
        result['oracle_checked'] = False
        self.writer.write_json('defect.json', self._envelope(result, space))
        return {'success': True, 'summary': str(report.defect), 'result': result}

    def _run_growth(self) -> Dict[str, Any]:
        require(self.config, 'g')
        space, counter, desc, oracle = self._counting_context()
        report = counter.growth_on_cyclic(desc, parse_group_element(self.config.g), self.config.n_max, oracle=oracle)
        result = report.to_dict()
        result['functional'] = desc.functional.describe()
        self.writer.export_growth_csv('growth.csv', report.rows)
        self.writer.write_json('growth.json', self._envelope(result, space))
        summary = "\n".join(f"{n},{value}" for n, value in report.rows)
        if not report.competitor_ok:
            return {'success': False, 'assertion': True, 'error': 'competitor lower bound violated',
                    'summary': summary, 'result': result}
        return {'success': True, 'summary': summary, 'result': result}

    def _run_certificate(self) -> Dict[str, Any]:
        require(self.config, 'g1', 'g2')
        service = FamilyService(self.builder, budget_cap=self.config.budget_cap)
        g1, g2 = Word.parse(self.config.g1), Word.parse(self.config.g2)
        if self.config.commutator:
            try:
                N, M, K, L = (int(e) for e in self.config.commutator.split(','))
            except ValueError:
                raise UsageError('commutator', "expected N,M,K,L")
            g1, g2 = service.commutator_variant(g1, g2, N, M, K, L, balanced=self.config.balanced)
        schedule = ExponentSchedule.parse(self.config.schedule, self.config.count)
        family = service.make_family(g1, g2, schedule)
        powers = [int(a) for a in self.config.powers.split(',')] if self.config.powers else None
        report = service.independence_certificate(family, powers, self.config.n_max, W=self.config.W,
                                                  oracle_check=self.config.oracle)
        result = report.to_dict()
        result['generators'] = [str(g1), str(g2)]
        result['schedule'] = schedule.to_dict()
        self.writer.write_json('certificate.json', self.writer.envelope(self.config.pipeline,
                                                                        self.config.to_dict(), result))
        self.writer.write_certificate_markdown('certificate.md', result)
        summary = f"accepted={report.accepted} slopes={[round(s, 4) for s in report.slopes]}"
        if not report.accepted:
            return {'success': False, 'assertion': True, 'error': '; '.join(report.failures),
                    'summary': summary, 'result': result}
        return {'success': True, 'summary': summary, 'result': result}

    def _run_wpd(self) -> Dict[str, Any]:
        require(self.config, 'g')
        space = build_space(self.config.space, self.builder)
        axes = AxisService(space)
        g = parse_group_element(self.config.g)
        x0 = parse_vertex(space, self.config.basepoint)
        verdict = axes.is_hyperbolic_element(g, x0, max(self.config.n_max, 2))
        report = axes.wpd_coarse_stabilizer(g, x0, self.config.C, self.config.N, self.config.enum_bound)
        result = {'hyperbolicity': verdict.to_dict(), 'coarse_stabilizer': report.to_dict(), 'oracle_checked': False}
        self.writer.write_json('wpd.json', self._envelope(result, space))
        return {'success': True, 'summary': f"{report.cardinality} (stable={report.stable})", 'result': result}

    def _run_delta(self) -> Dict[str, Any]:
        space = build_space(self.config.space, self.builder)
        inspector = GraphInspector(space)
        if self.config.triples == "all":
            sample: Any = "all"
        else:
            try:
                size = int(self.config.triples)
            except ValueError:
                raise UsageError('triples', "expected 'all' or a sample size")
            sample = sample_triples(space.num_vertices, size, np.random.default_rng(self.config.seed))
        delta = inspector.delta_estimate(sample)
        result = {'delta': delta, 'triples': self.config.triples, 'seed': self.config.seed, 'oracle_checked': False}
        self.writer.write_json('delta.json', self._envelope(result, space))
        return {'success': True, 'summary': str(delta), 'result': result}

    def _run_farey_stab(self) -> Dict[str, Any]:
        require(self.config, 'a', 'b')
        space = build_space(self.config.space, self.builder)
        report = AxisService(space).stabilizer_intersection(Slope.parse(self.config.a), Slope.parse(self.config.b),
                                                            self.config.enum_bound)
        result = report.to_dict()
        result['oracle_checked'] = False
        self.writer.write_json('farey-stab.json', self._envelope(result, space))
        return {'success': True, 'summary': f"{report.cardinality} (stable={report.stable})", 'result': result}


def run(config: RunConfig) -> int:
    """Execute one pipeline; 0 on success, 1 on usage errors, 2 on failed assertions"""
    try:
        config.validate()
        result = PipelineRunner(config).run()
    except OracleMismatchError as e:
        logger.error(f"Oracle mismatch: {e} {e.context}")
        return EXIT_ASSERTION
    except UsageError as e:
        logger.error(f"Usage error in field {e.field_name}: {e}")
        return EXIT_USAGE
    except QuasimorphismError as e:
        logger.error(f"{e.kind}: {e}")
        return EXIT_USAGE
    except (ValueError, KeyError) as e:
        logger.error(f"Invalid input: {e}")
        logger.debug(traceback.format_exc())
        return EXIT_USAGE

    print(result['summary'])
    if not result['success']:
        logger.error(f"Pipeline {config.pipeline} failed: {result['error']}")
        return EXIT_ASSERTION if result.get('assertion') else EXIT_USAGE
    logger.info(f"Pipeline {config.pipeline} finished")
    return EXIT_OK


def setup_logging(level: str = None, log_file: Optional[str] = None):
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, (level or Config.LOG_LEVEL).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON file mirroring RunConfig; flags given explicitly win')
    common.add_argument('--space', help="e.g. f2:radius=6, farey:Q=60,center=0/1, cycle:n=12")
    common.add_argument('--w', help='word (trees) or comma-separated vertex walk, e.g. 0/1,1/0')
    common.add_argument('--W', type=int)
    common.add_argument('--basepoint')
    common.add_argument('--g', help='group element: word or [[a,b],[c,d]]')
    common.add_argument('--n-max', dest='n_max', type=int)
    common.add_argument('--pair-radius', dest='pair_radius', type=int)
    common.add_argument('--triples')
    common.add_argument('--g1')
    common.add_argument('--g2')
    common.add_argument('--schedule')
    common.add_argument('--count', type=int)
    common.add_argument('--powers', help='comma-separated a_i')
    common.add_argument('--commutator', help='N,M,K,L: build the family from commutator-style generators')
    common.add_argument('--balanced', action='store_true', default=None)
    common.add_argument('--C', type=float)
    common.add_argument('--N', type=int)
    common.add_argument('--enum-bound', dest='enum_bound', type=int)
    common.add_argument('--translate-bound', dest='translate_bound', type=int)
    common.add_argument('--a')
    common.add_argument('--b')
    common.add_argument('--oracle', action='store_true', default=None, help='cross-check with the brute-force oracle')
    common.add_argument('--budget-cap', dest='budget_cap', type=int)
    common.add_argument('--output-dir', dest='output_dir')
    common.add_argument('--seed', type=int)
    common.add_argument('--log-level', dest='log_level')
    common.add_argument('--log-file', dest='log_file')

    parser = argparse.ArgumentParser(prog='qm', description='Counting quasi-homomorphisms on hyperbolic graphs')
    parser.add_argument('--version', action='version', version=f"%(prog)s {Config.VERSION}")
    subparsers = parser.add_subparsers(dest='pipeline', required=True)
    for name in PIPELINES:
        subparsers.add_parser(name, parents=[common])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    names = {f.name for f in fields(RunConfig)}
    overrides = {key: value for key, value in vars(args).items() if key in names and value is not None}
    if args.config:
        return RunConfig.from_json(args.config, overrides)
    return RunConfig(**overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level, args.log_file or Config.LOG_FILE)
    try:
        config = config_from_args(args)
    except (UsageError, TypeError, ValueError, OSError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_USAGE
    return run(config)
