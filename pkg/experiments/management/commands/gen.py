from django.core.management.base import CommandError

from experiments.config import FAMILY_KEYS, parse_list
from experiments.management.base import ExperimentCommand
from graphs.exceptions import GraphError
from graphs.generators import generate
from graphs.oracles import metrics


class Command(ExperimentCommand):
    help = 'Generate a graph of one family and write it in the canonical edge-list format'

    def add_arguments(self, parser):
        self.add_graph_arguments(parser)
        parser.add_argument('--out', type=str, help='Graph file to write (default: stdout)')
        parser.add_argument('--config', type=str, help='key=value file; flags override its values')

    def handle(self, *args, **options):
        values = self.config_values(options)
        family = values.get('family')
        if not family:
            raise CommandError('--family is required')
        params = {key: values[key] for key in FAMILY_KEYS if values.get(key) is not None}
        try:
            for key in ('A', 'B'):
                if key in params:
                    params[key] = [int(item) for item in parse_list(params[key])]
            seed = int(values.get('seed') or 0)
            graph = generate(family, params, seed)
        except (GraphError, ValueError) as exc:
            raise CommandError(f"Cannot generate {family}: {exc}")

        out = values.get('out')
        if not out:
            self.stdout.write(graph.to_text(), ending='')
            return
        graph.write(out)
        shape = metrics(graph)
        self.stdout.write(self.style.SUCCESS(f"Wrote {family} graph to {out}"))
        self.show_rows([('n', graph.n), ('m', graph.m), ('HD', shape.HD), ('WD', shape.WD), ('seed', seed)])
