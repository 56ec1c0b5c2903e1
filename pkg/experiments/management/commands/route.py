from django.core.management.base import CommandError

from experiments.management.base import ExperimentCommand, write_json
from experiments.runner import load_source
from graphs.oracles import DistanceOracle
from routing.decide import route
from routing.tables import build_tables
from routing.tight import assign_tight_labels, tight_route


class Command(ExperimentCommand):
    help = 'Build routing tables and route one packet from --source to --target'

    def add_arguments(self, parser):
        self.add_graph_arguments(parser)
        self.add_run_arguments(parser, record=False)
        parser.add_argument('--source', type=int, required=True, help='Node the packet starts at')
        parser.add_argument('--target', type=int, required=True, help='Destination node')
        parser.add_argument('--tight', action='store_true', help='Address the target by its label in 1..n')

    def handle(self, *args, **options):
        config = self.experiment_config(options, scheme='tight' if options['tight'] else 'routing')
        source, target = options['source'], options['target']
        if not (1 <= source <= config.n and 1 <= target <= config.n):
            raise CommandError(f"--source and --target must be nodes 1..{config.n}")

        g, _ = self.guarded(load_source, config)
        sim = config.sim_config(g.n)
        oracle = DistanceOracle(g) if sim.oracle else None
        labels, tables, trace = self.guarded(build_tables, g, config.alpha, sim, config.seed)
        if options['tight']:
            labeling, label_trace = self.guarded(assign_tight_labels, g, tables, sim, config.seed)
            trace.absorb(label_trace, 'tight labels')
            bound = tables.params.tight_stretch
            result = self.guarded(tight_route, g, tables, labeling, source, labeling.labels[target], oracle)
        else:
            bound = tables.params.stretch
            result = self.guarded(route, g, tables.tables, labels, source, target, oracle)

        self.stdout.write(self.style.HTTP_INFO(f"Route {source} -> {target}: {' '.join(map(str, result.path))}"))
        self.show_rows([
            ('hops', result.hops),
            ('weight', result.weight),
            ('estimate', result.estimate),
            ('wd', result.oracle_wd),
            ('stretch', f"{result.stretch:.3f}"),
            ('bound', bound),
            ('build rounds', trace.rounds),
        ])
        if config.out:
            write_json(config.out, {'route': result.to_dict(), 'bound': bound, 'trace': trace.to_dict()})
            self.stdout.write(self.style.SUCCESS(f"Wrote route to {config.out}"))
        if result.stretch > bound:
            raise CommandError(f"stretch {result.stretch:.3f} exceeds {bound}")
