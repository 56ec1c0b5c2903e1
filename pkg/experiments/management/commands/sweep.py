import io

from django.core.management.base import CommandError
from tabulate import tabulate

from experiments.config import ALPHA_SCHEMES, SCHEMES, MetricsRecord, parse_list
from experiments.exceptions import format_errors
from experiments.management.base import ExperimentCommand
from experiments.models import ExperimentRun
from experiments.runner import records_frame, run_matrix
from experiments.serializers import ExperimentConfigSerializer

# Keys that span the matrix instead of being passed through to every run.
MATRIX_KEYS = ('n', 'alpha', 'k', 'seed', 'seeds', 'jobs')


def _number(text):
    return int(text) if str(text).isdigit() else None


class Command(ExperimentCommand):
    help = 'Run a scheme over a matrix of sizes, alpha (or k) values and seeds; write one CSV row per run'

    def add_arguments(self, parser):
        self.add_graph_arguments(parser, matrix=True)
        self.add_run_arguments(parser, matrix=True)
        parser.add_argument('--seeds', type=str, help='Seeds, e.g. 0..4 or 0,2,7 (default: --seed)')
        parser.add_argument('--scheme', type=str, choices=SCHEMES, help='Scheme to run (default: routing)')
        parser.add_argument('--jobs', type=int, help='Worker processes (default: 1)')

    def handle(self, *args, **options):
        values = self.config_values(options)
        for key in ('seeds', 'jobs'):
            if options.get(key) is not None:
                values[key] = options[key]
        if not values.get('graph'):
            values.setdefault('family', 'random_weighted')
        scheme = values.get('scheme') or 'routing'
        if scheme not in SCHEMES:
            raise CommandError(f"Unknown scheme '{scheme}'")
        try:
            jobs = max(1, int(values.get('jobs') or 1))
            cells = self.matrix(values, scheme)
        except ValueError as exc:
            raise CommandError(f"Invalid matrix: {exc}")

        configs = [cell for cell in cells if not isinstance(cell, MetricsRecord)]
        self.stderr.write(self.style.HTTP_INFO(f"Sweeping {scheme}: {len(cells)} runs, {jobs} worker(s)"))
        ran = run_matrix(configs, jobs=jobs)
        if options.get('record'):
            for config, record in zip(configs, ran):
                ExperimentRun.from_record(record, config.source)

        results = iter(ran)
        frame = records_frame(cell if isinstance(cell, MetricsRecord) else next(results) for cell in cells)
        out = values.get('out')
        if out:
            frame.to_csv(out, index=False)
            self.stdout.write(self.style.SUCCESS(f"Wrote {len(frame)} rows to {out}"))
        else:
            buffer = io.StringIO()
            frame.to_csv(buffer, index=False)
            self.stdout.write(buffer.getvalue(), ending='')

        self.summarize(frame, scheme)
        failed = int((frame['status'] != 'ok').sum())
        if failed:
            raise CommandError(f"{failed} of {len(frame)} runs did not validate")

    def matrix(self, values, scheme):
        """
        One config per (n, alpha or k, seed), in that nesting order. Cells
        that fail validation stay in place as 'failed' records.
        """
        key = 'alpha' if scheme in ALPHA_SCHEMES else 'k'
        sizes = [None] if values.get('graph') else parse_list(values.get('n'))
        grid = parse_list(values.get(key)) or ['1']
        seeds = parse_list(values.get('seeds') or values.get('seed') or '0')
        base = {name: value for name, value in values.items() if name not in MATRIX_KEYS}
        base['scheme'] = scheme

        cells = []
        for n in sizes:
            for setting in grid:
                for seed in seeds:
                    serializer = ExperimentConfigSerializer(data={**base, 'n': n, key: setting, 'seed': seed})
                    if serializer.is_valid():
                        cells.append(serializer.save())
                        continue
                    failed = MetricsRecord(n=_number(n), scheme=scheme, seed=_number(seed), status='failed',
                                           detail=format_errors(serializer.errors))
                    if key == 'alpha':
                        failed.alpha = setting
                    else:
                        failed.k = _number(setting)
                    cells.append(failed)
        return cells

    def summarize(self, frame, scheme):
        if frame.empty:
            self.stderr.write(self.style.WARNING("Empty matrix: wrote the header only"))
            return
        key = 'alpha' if scheme in ALPHA_SCHEMES else 'k'
        summary = (
            frame.groupby(['n', key], dropna=False)
            .agg(runs=('status', 'size'), ok=('status', lambda s: int((s == 'ok').sum())),
                 max_stretch=('max_stretch', 'max'), mean_rounds=('rounds', 'mean'))
            .reset_index()
        )
        self.stderr.write(tabulate(summary, headers='keys', tablefmt='simple', showindex=False))
        self.stderr.write('')
