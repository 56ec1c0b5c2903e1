import json
import math
import tempfile
from fractions import Fraction
from io import StringIO
from pathlib import Path

import pandas as pd
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings

from congest.engine import RoundTrace

from .config import RECORD_FIELDS, MetricsRecord, merge_options, parse_config_text, parse_list
from .exceptions import ConfigFileError
from .models import ExperimentRun
from .runner import execute, records_frame, run_matrix
from .serializers import ExperimentConfigSerializer, MetricsRecordSerializer, RoundTraceSerializer

P5_INSTANCE = "5 4\n1 2 1\n2 3 1\n3 4 1\n4 5 1\nT 1 0\nT 5 0\n"


def experiment(**values):
    serializer = ExperimentConfigSerializer(data=values)
    serializer.is_valid(raise_exception=True)
    return serializer.save()


def run_command(name, **options):
    out, err = StringIO(), StringIO()
    call_command(name, stdout=out, stderr=err, **options)
    return out.getvalue(), err.getvalue()


class ConfigFileTests(SimpleTestCase):

    def test_key_values_and_comments(self):
        text = "# sweep\nfamily = random_weighted\nn=32,64  # sizes\n\n--seed=3\nset-a=1,2\n"
        self.assertEqual(parse_config_text(text),
                         {'family': 'random_weighted', 'n': '32,64', 'seed': '3', 'A': '1,2'})

    def test_malformed_line(self):
        with self.assertRaises(ConfigFileError) as ctx:
            parse_config_text("n=8\nalpha 1\n")
        self.assertEqual(ctx.exception.line_no, 2)

    def test_flags_override_file(self):
        merged = merge_options({'n': '8', 'alpha': '1'}, {'n': 16, 'alpha': None, 'seed': 2})
        self.assertEqual(merged, {'n': 16, 'alpha': '1', 'seed': 2})

    def test_lists(self):
        self.assertEqual(parse_list('32,64'), ['32', '64'])
        self.assertEqual(parse_list('0..2'), ['0', '1', '2'])
        self.assertEqual(parse_list(''), [])
        self.assertEqual(parse_list(None), [])


class ConfigSerializerTests(SimpleTestCase):

    def errors(self, **values):
        serializer = ExperimentConfigSerializer(data=values)
        self.assertFalse(serializer.is_valid())
        return serializer.errors

    def test_generated_graph(self):
        config = experiment(family='path', n='8', alpha='3/4', oracle='off')
        self.assertEqual((config.n, config.alpha, config.k), (8, Fraction(3, 4), None))
        self.assertEqual(config.params, {'n': 8})
        self.assertIs(config.oracle, False)
        self.assertEqual(config.source, 'path(n=8)')

    def test_defaults_per_scheme(self):
        self.assertEqual(experiment(family='path', n=8).alpha, Fraction(1))
        config = experiment(family='path', n=8, scheme='sketch')
        self.assertEqual((config.k, config.alpha), (1, None))

    def test_exactly_one_graph_source(self):
        self.assertIn('non_field_errors', self.errors(scheme='routing'))
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'g.txt'
            path.write_text("2 1\n1 2 1\n")
            self.assertIn('non_field_errors', self.errors(graph=str(path), family='path', n=2))
            self.assertEqual(experiment(graph=str(path)).n, 2)

    def test_parameter_ranges(self):
        self.assertIn('alpha', self.errors(family='path', n=8, alpha='0.4'))
        self.assertIn('alpha', self.errors(family='path', n=8, alpha='abc'))
        self.assertIn('k', self.errors(family='path', n=64, scheme='sketch', k=7))
        self.assertIn('k', self.errors(family='path', n=64, scheme='diameter', k=0))
        self.assertIn('seed', self.errors(family='path', n=8, seed=-1))
        self.assertIn('bits', self.errors(family='path', n=8, bits=0))
        self.assertIn('retries', self.errors(family='path', n=8, retries=-1))

    def test_family_sizes(self):
        self.assertEqual(experiment(family='grid', rows=3, cols=4).n, 12)
        config = experiment(family='lb_diameter', m=3, omega=16, A='1,3', scheme='diameter')
        self.assertEqual(config.n, 16)
        self.assertEqual(config.params['A'], [1, 3])
        self.assertIn('family', self.errors(family='grid', rows=3))

    def test_missing_graph_file(self):
        self.assertIn('graph', self.errors(graph='/nonexistent/graph.txt'))


class OutputSerializerTests(SimpleTestCase):

    def test_metrics_columns(self):
        data = MetricsRecordSerializer(MetricsRecord(n=8, scheme='routing', alpha='1')).data
        self.assertEqual(tuple(data), RECORD_FIELDS)
        self.assertIsNone(data['max_stretch'])

    def test_trace_phases(self):
        trace = RoundTrace(rounds=5, messages=9, phases=[('bfs-tree', 3), ('broadcast', 2)])
        data = RoundTraceSerializer(trace).data
        self.assertEqual(data['rounds'], 5)
        self.assertEqual(data['phases'][1], {'phase': 'broadcast', 'rounds': 2})


class RunnerTests(SimpleTestCase):

    def test_routing_on_path_is_exact(self):
        record = execute(experiment(family='path', n=8, alpha='1')).record
        self.assertTrue(record.ok, record.detail)
        self.assertEqual(record.max_stretch, 1.0)
        self.assertEqual((record.n, record.HD, record.WD, record.k, record.L), (8, 7, 7, 1, 1))
        self.assertGreater(record.max_table_bits, 0)
        self.assertGreater(record.label_bits, 0)

    def test_sketch_stretch(self):
        record = execute(experiment(family='random_weighted', n=32, seed=0, scheme='sketch', k=1)).record
        self.assertTrue(record.ok, record.detail)
        self.assertLessEqual(record.max_stretch, 10)
        self.assertLessEqual(record.mean_stretch, record.max_stretch)

    def test_diameter_on_star(self):
        result = execute(experiment(family='star', n=9, scheme='diameter', k=1))
        self.assertTrue(result.record.ok, result.record.detail)
        self.assertEqual(result.record.WD, 2)
        self.assertTrue(2 <= result.artifacts['diameter']['estimate'] <= 6)

    def test_oracle_off_leaves_stretch_empty(self):
        record = execute(experiment(family='path', n=8, alpha='1', oracle='off')).record
        self.assertTrue(record.ok)
        self.assertIsNone(record.max_stretch)
        self.assertIsNone(record.mean_stretch)

    def test_failures_become_rows(self):
        config = experiment(family='path', n=8, alpha='1', bits=1)
        [record] = run_matrix([config])
        self.assertEqual(record.status, 'failed')
        self.assertIn('ValueError', record.detail)

    def test_frame_layout(self):
        frame = records_frame([MetricsRecord(n=8, scheme='routing', alpha='1', L=1),
                               MetricsRecord(n=16, scheme='routing', status='failed')])
        self.assertEqual(tuple(frame.columns), RECORD_FIELDS)
        self.assertEqual(str(frame['L'].dtype), 'Int64')
        self.assertIn('\n8,,,routing,1,,1,', frame.to_csv(index=False))


class GenCommandTests(SimpleTestCase):

    def test_writes_canonical_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'p4.txt'
            out, _ = run_command('gen', family='path', n=4, out=str(path))
            self.assertEqual(path.read_text(), "4 3\n1 2 1\n2 3 1\n3 4 1\n")
            self.assertIn('Wrote path graph', out)

    def test_stdout(self):
        out, _ = run_command('gen', family='star', n=3)
        self.assertEqual(out, "3 2\n1 2 1\n1 3 1\n")

    def test_reproducible(self):
        first, _ = run_command('gen', family='random_weighted', n=20, seed=4)
        second, _ = run_command('gen', family='random_weighted', n=20, seed=4)
        self.assertEqual(first, second)

    def test_invalid_params(self):
        with self.assertRaises(CommandError):
            run_command('gen', family='path')
        with self.assertRaises(CommandError):
            run_command('gen', n=4)

    def test_config_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = Path(tmp) / 'gen.conf'
            config.write_text("family=path\nn=6  # overridden\n")
            out, _ = run_command('gen', config=str(config), n=3)
            self.assertEqual(out, "3 2\n1 2 1\n2 3 1\n")


class BuildCommandTests(SimpleTestCase):

    def test_routing_dumps(self):
        with tempfile.TemporaryDirectory() as tmp:
            out, _ = run_command('build', family='path', n=8, alpha='1', out=tmp)
            metrics = json.loads((Path(tmp) / 'metrics.json').read_text())
            trace = json.loads((Path(tmp) / 'trace.json').read_text())
            tables = json.loads((Path(tmp) / 'tables.json').read_text())
        self.assertEqual(metrics['max_stretch'], 1.0)
        self.assertEqual(metrics['status'], 'ok')
        self.assertEqual(trace['rounds'], metrics['rounds'])
        self.assertEqual(sorted(tables['labels']), [str(v) for v in range(1, 9)])
        self.assertIn('routing validated', out)

    def test_diameter_command(self):
        with tempfile.TemporaryDirectory() as tmp:
            run_command('diameter', family='star', n=9, k=1, out=tmp)
            tables = json.loads((Path(tmp) / 'tables.json').read_text())
        self.assertTrue(2 <= tables['diameter']['estimate'] <= 6)

    def test_gsf_instance_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'p5.gsf'
            path.write_text(P5_INSTANCE)
            run_command('gsf', graph=str(path), k=1, out=tmp)
            tables = json.loads((Path(tmp) / 'tables.json').read_text())
        self.assertEqual(tables['solution']['weight'], 4)
        self.assertEqual(tables['report']['optimum'], 4)

    def test_invalid_config_exits_nonzero(self):
        with self.assertRaises(CommandError):
            run_command('build', family='path', n=8, alpha='0.3')
        with self.assertRaises(CommandError):
            run_command('build', family='path', n=8, bits=2)
        with self.assertRaises(CommandError):
            run_command('sketch', graph='/nonexistent/graph.txt')


class QueryCommandTests(SimpleTestCase):

    def test_route_on_path(self):
        out, _ = run_command('route', family='path', n=8, alpha='1', source=1, target=8)
        self.assertIn('Route 1 -> 8: 1 2 3 4 5 6 7 8', out)

    def test_tight_route(self):
        out, _ = run_command('route', family='path', n=8, alpha='1', source=8, target=1, tight=True)
        self.assertRegex(out, r'Route 8 -> 1: 8( \d+)* 1\n')

    def test_estimates(self):
        out, _ = run_command('estimate', family='path', n=8, alpha='1', source=1, target=8)
        self.assertIn('routing estimate 1 -> 8', out)
        out, _ = run_command('estimate', family='path', n=8, k=1, source=2, target=7, scheme='sketch')
        self.assertIn('sketch estimate 2 -> 7', out)

    def test_nodes_out_of_range(self):
        with self.assertRaises(CommandError):
            run_command('route', family='path', n=8, source=0, target=3)


class SweepCommandTests(SimpleTestCase):

    def sweep(self, path, **options):
        run_command('sweep', out=str(path), **options)
        return path.read_bytes()

    def test_row_count_and_order(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'sweep.csv'
            self.sweep(path, n='32,64', alpha='0.75,1', seeds='0..2', oracle='off')
            frame = pd.read_csv(path)
        self.assertEqual(len(frame), 12)
        self.assertEqual(tuple(frame.columns), RECORD_FIELDS)
        self.assertEqual(list(frame['n']), [32] * 6 + [64] * 6)
        self.assertEqual(list(frame['seed']), [0, 1, 2] * 4)
        self.assertEqual(list(frame['status']), ['ok'] * 12)

    def test_empty_matrix_header_only(self):
        with tempfile.TemporaryDirectory() as tmp:
            content = self.sweep(Path(tmp) / 'empty.csv', n='')
        self.assertEqual(content.decode(), ','.join(RECORD_FIELDS) + '\n')

    def test_rerun_is_byte_identical(self):
        with tempfile.TemporaryDirectory() as tmp:
            first = self.sweep(Path(tmp) / 'a.csv', n='16', scheme='sketch', k='1', seeds='0..1')
            second = self.sweep(Path(tmp) / 'b.csv', n='16', scheme='sketch', k='1', seeds='0..1')
        self.assertEqual(first, second)

    def test_invalid_cells_are_rows(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'bad.csv'
            with self.assertRaises(CommandError):
                run_command('sweep', out=str(path), n='16', scheme='sketch', k='1,9', oracle='off')
            frame = pd.read_csv(path)
        self.assertEqual(list(frame['status']), ['ok', 'failed'])
        self.assertIn('k must lie', frame['detail'][1])



# Constants small enough that no hop or list bound clamps at n <= 256.
UNCLAMPED = {**settings.ROUTINGLAB, 'HIERARCHY_C': 1.0, 'HIERARCHY_C_PRIME': 2.0, 'SKELETON_C': 1.0}


@override_settings(ROUTINGLAB=UNCLAMPED)
class ScalingTests(SimpleTestCase):
    """
    One routing sweep at alpha = 3/4 over n = 32..256. Rounds and table bits
    are checked against C (n^alpha log^2 n), C fitted at the smallest size.
    """
    alpha = 0.75

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'scaling.csv'
            run_command('sweep', out=str(path), n='32,64,128,256', alpha='0.75', seeds='0', oracle='off')
            cls.frame = pd.read_csv(path).set_index('n')

    def shape(self, n):
        return n ** self.alpha * math.log2(n) ** 2

    def test_every_size_built(self):
        self.assertEqual(list(self.frame.index), [32, 64, 128, 256])
        self.assertEqual(set(self.frame['status']), {'ok'})
        self.assertEqual(set(self.frame['k']), {2})

    def test_build_rounds(self):
        rows = self.frame.loc[[64, 128, 256]]
        bound = {n: self.shape(n) + rows.loc[n, 'HD'] for n in rows.index}
        fitted = rows.loc[64, 'rounds'] / bound[64]
        self.assertTrue(rows['rounds'].is_monotonic_increasing)
        for n in (128, 256):
            with self.subTest(n=n):
                self.assertLessEqual(rows.loc[n, 'rounds'], 2 * fitted * bound[n])

    def test_max_table_bits(self):
        bits = self.frame['max_table_bits']
        fitted = bits[32] / self.shape(32)
        for n in (64, 128, 256):
            with self.subTest(n=n):
                self.assertLessEqual(bits[n], 2 * fitted * self.shape(n))


class RecordTests(TestCase):

    def test_build_records_run(self):
        out, _ = run_command('build', family='path', n=8, alpha='1', record=True)
        run = ExperimentRun.objects.get()
        self.assertIn(f'Recorded run #{run.pk}', out)
        self.assertEqual((run.scheme, run.status, run.n, run.max_stretch), ('routing', 'ok', 8, 1.0))
        self.assertEqual(run.source, 'path(n=8)')
        self.assertEqual(run.to_record().to_row()['alpha'], '1')

    def test_sweep_records_every_run(self):
        with tempfile.TemporaryDirectory() as tmp:
            run_command('sweep', out=str(Path(tmp) / 's.csv'), n='16', seeds='0..1', oracle='off', record=True)
        self.assertEqual(ExperimentRun.objects.filter(scheme='routing').count(), 2)
