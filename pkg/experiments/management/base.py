"""
Flags and helpers shared by the experiment commands.
"""
import json
import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from tabulate import tabulate

from experiments.config import SCHEMES, load_config_file, merge_options
from experiments.exceptions import ExperimentError, format_errors
from experiments.models import ExperimentRun
from experiments.runner import RUN_ERRORS, execute
from experiments.serializers import ExperimentConfigSerializer, MetricsRecordSerializer
from graphs.generators import FAMILIES

logger = logging.getLogger(__name__)


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    return path


class ExperimentCommand(BaseCommand):
    """
    Base for commands that take a graph source plus run parameters.
    Every flag defaults to None so config-file values show through.
    """

    def add_graph_arguments(self, parser, matrix=False):
        parser.add_argument('--graph', type=str, help='Graph (or Steiner instance) file')
        parser.add_argument('--family', type=str, choices=FAMILIES, help='Generate the graph instead')
        if matrix:
            parser.add_argument('--n', type=str, help='Node counts, e.g. 32,64')
        else:
            parser.add_argument('--n', type=int, help='Number of nodes')
        parser.add_argument('--p', type=float, help='Edge probability (random_weighted)')
        parser.add_argument('--rows', type=int, help='Grid rows')
        parser.add_argument('--cols', type=int, help='Grid columns')
        parser.add_argument('--m', type=int, help='Array side (lb_diameter)')
        parser.add_argument('--omega', type=int, help='Heavy weight (lb_diameter)')
        parser.add_argument('--set-a', dest='A', type=str, help="Alice's rows, e.g. 1,3 (lb_diameter)")
        parser.add_argument('--set-b', dest='B', type=str, help="Bob's rows (lb_diameter)")
        parser.add_argument('--weights', type=str, choices=['unit', 'random'], help='Edge weights')
        parser.add_argument('--seed', type=int, help='Random seed (default: 0)')

    def add_run_arguments(self, parser, record=True, matrix=False):
        parser.add_argument('--alpha', type=str, help='Table-size exponent in [1/2, 1] (routing, tight)')
        parser.add_argument('--k', type=str if matrix else int,
                            help='Stretch parameter in 1..log n (sketch, diameter, gsf)')
        parser.add_argument('--bits', type=int, help='Bandwidth B in bits per edge per round')
        parser.add_argument('--retries', type=int, help='Validate-and-retry budget')
        parser.add_argument('--oracle', type=str, choices=['on', 'off'], help='Check against exact distances')
        parser.add_argument('--terminals', type=int, help='Random terminals when the instance lists none (gsf)')
        parser.add_argument('--components', type=int, help='Components the terminals are dealt into (gsf)')
        parser.add_argument('--out', type=str, help='Output path')
        parser.add_argument('--config', type=str, help='key=value file; flags override its values')
        if record:
            parser.add_argument('--record', action='store_true', help='Store the metrics as an ExperimentRun')

    def add_arguments(self, parser):
        self.add_graph_arguments(parser)
        self.add_run_arguments(parser)

    def config_values(self, options):
        """Config-file values with the given flags on top."""
        file_values = {}
        if options.get('config'):
            try:
                file_values = load_config_file(options['config'])
            except ExperimentError as exc:
                raise CommandError(str(exc))
        flags = {key: options.get(key) for key in ExperimentConfigSerializer().fields}
        return merge_options(file_values, flags)

    def experiment_config(self, options, **fixed):
        values = self.config_values(options)
        values.update(fixed)
        serializer = ExperimentConfigSerializer(data=values)
        if not serializer.is_valid():
            raise CommandError(f"Invalid experiment: {format_errors(serializer.errors)}")
        return serializer.save()

    def guarded(self, func, *args, **kwargs):
        """Run func, turning domain errors into CommandError."""
        try:
            return func(*args, **kwargs)
        except FileNotFoundError as exc:
            logger.error("missing file: %s", exc.filename)
            raise CommandError(f"File not found: {exc.filename}")
        except (*RUN_ERRORS, OSError) as exc:
            logger.error("%s: %s", type(exc).__name__, exc)
            raise CommandError(f"{type(exc).__name__}: {exc}")

    def show_rows(self, rows, headers=('metric', 'value')):
        self.stdout.write(tabulate(rows, headers=list(headers), tablefmt='simple'))
        self.stdout.write('')


class BuildCommand(ExperimentCommand):
    """Build one scheme, print its metrics and write the JSON dumps."""
    help = 'Build a scheme on a graph and report its metrics (JSON dumps with --out DIR)'
    scheme = None

    def add_arguments(self, parser):
        super().add_arguments(parser)
        if self.scheme is None:
            parser.add_argument('--scheme', type=str, choices=SCHEMES, help='Scheme to build (default: routing)')

    def handle(self, *args, **options):
        fixed = {'scheme': self.scheme} if self.scheme else {}
        config = self.experiment_config(options, **fixed)
        self.stdout.write(self.style.HTTP_INFO(f"Building {config.scheme} ({config.parameter}) on {config.source}"))

        result = self.guarded(execute, config)
        record = result.record
        self.show_rows([(name, value) for name, value in record.to_row().items() if name != 'detail'])

        if config.out:
            out = Path(config.out)
            write_json(out / 'metrics.json', MetricsRecordSerializer(record).data)
            write_json(out / 'trace.json', result.artifacts['trace'])
            write_json(out / 'tables.json', {key: value for key, value in result.artifacts.items()
                                             if key != 'trace'})
            self.stdout.write(self.style.SUCCESS(f"Wrote metrics, trace and tables to {out}"))

        if options.get('record'):
            run = ExperimentRun.from_record(record, config.source)
            self.stdout.write(self.style.SUCCESS(f"Recorded run #{run.pk}"))

        if not record.ok:
            self.stdout.write(self.style.ERROR(record.detail))
            raise CommandError(f"{config.scheme} run did not validate ({record.status})")
        self.stdout.write(self.style.SUCCESS(f"{config.scheme} validated in {record.rounds} rounds"))
