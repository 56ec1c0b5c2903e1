from django.core.management.base import CommandError

from experiments.management.base import ExperimentCommand, write_json
from experiments.runner import load_source
from extensions.sketches import build_sketches, sketch_estimate
from graphs.oracles import DistanceOracle
from routing.decide import estimate_distance
from routing.tables import build_tables


class Command(ExperimentCommand):
    help = 'Estimate the distance between two nodes from routing labels or distance sketches'

    def add_arguments(self, parser):
        self.add_graph_arguments(parser)
        self.add_run_arguments(parser, record=False)
        parser.add_argument('--source', type=int, required=True, help='Node holding the table or sketch')
        parser.add_argument('--target', type=int, required=True, help='Node whose label is queried')
        parser.add_argument('--scheme', type=str, choices=['routing', 'sketch'], default='routing',
                            help='Where the estimate comes from (default: routing)')

    def handle(self, *args, **options):
        config = self.experiment_config(options, scheme=options['scheme'])
        v, w = options['source'], options['target']
        if not (1 <= v <= config.n and 1 <= w <= config.n):
            raise CommandError(f"--source and --target must be nodes 1..{config.n}")

        g, _ = self.guarded(load_source, config)
        sim = config.sim_config(g.n)
        if config.scheme == 'routing':
            labels, tables, trace = self.guarded(build_tables, g, config.alpha, sim, config.seed)
            estimate = estimate_distance(tables[v], labels[w])
            bound = tables.params.stretch
        else:
            sketches, labels, trace = self.guarded(build_sketches, g, config.k, sim, config.seed)
            estimate = self.guarded(sketch_estimate, sketches[v], labels[w])
            bound = sketches.stretch_bound

        rows = [('estimate', estimate), ('bound', bound), ('build rounds', trace.rounds)]
        wd = None
        if sim.oracle:
            wd = DistanceOracle(g).wd(v, w)
            rows[1:1] = [('wd', wd), ('ratio', f"{estimate / wd:.3f}" if wd else '1.000')]
        self.stdout.write(self.style.HTTP_INFO(f"{config.scheme} estimate {v} -> {w} ({config.parameter})"))
        self.show_rows(rows)
        if config.out:
            write_json(config.out, {'source': v, 'target': w, 'estimate': estimate, 'wd': wd, 'bound': bound,
                                    'trace': trace.to_dict()})
            self.stdout.write(self.style.SUCCESS(f"Wrote estimate to {config.out}"))
        if wd is not None and not wd <= estimate <= bound * wd:
            raise CommandError(f"estimate {estimate} is outside [{wd}, {bound * wd}]")
