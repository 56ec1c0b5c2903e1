# File: experiments/serializers.py
import math
from fractions import Fraction
from pathlib import Path

from rest_framework import serializers

from graphs.exceptions import GraphError
from graphs.generators import FAMILIES
from graphs.graph import parse_graph

from .config import ALPHA_SCHEMES, FAMILY_KEYS, SCHEMES, ExperimentConfig, parse_list


def family_size(family, values):
    """Node count a generator will produce, or None when params are missing."""
    if family == 'grid':
        if values.get('rows') and values.get('cols'):
            return values['rows'] * values['cols']
        return None
    if family == 'lb_diameter':
        # m*m array, Alice, Bob, m hubs and m - 1 internal tree nodes
        return (values['m'] + 1) ** 2 if values.get('m') else None
    return values.get('n')


# ------------------------------------------------------------------------------
# 1. Experiment configuration (validated input of every command)
# ------------------------------------------------------------------------------
class ExperimentConfigSerializer(serializers.Serializer):
    """
    Validates merged command-line and config-file values.
    save() returns an ExperimentConfig.
    """
    graph = serializers.CharField(default=None, allow_null=True)
    family = serializers.ChoiceField(choices=FAMILIES, default=None, allow_null=True)
    n = serializers.IntegerField(min_value=1, default=None, allow_null=True)
    p = serializers.FloatField(default=None, allow_null=True)
    rows = serializers.IntegerField(min_value=1, default=None, allow_null=True)
    cols = serializers.IntegerField(min_value=1, default=None, allow_null=True)
    m = serializers.IntegerField(min_value=2, default=None, allow_null=True)
    omega = serializers.IntegerField(min_value=1, default=None, allow_null=True)
    A = serializers.CharField(default=None, allow_null=True, allow_blank=True)
    B = serializers.CharField(default=None, allow_null=True, allow_blank=True)
    weights = serializers.ChoiceField(choices=['unit', 'random'], default=None, allow_null=True)

    scheme = serializers.ChoiceField(choices=SCHEMES, default='routing')
    alpha = serializers.CharField(default=None, allow_null=True)
    k = serializers.IntegerField(default=None, allow_null=True)
    seed = serializers.IntegerField(min_value=0, default=0)
    bits = serializers.IntegerField(min_value=1, default=None, allow_null=True)
    retries = serializers.IntegerField(min_value=0, default=None, allow_null=True)
    oracle = serializers.BooleanField(default=None, allow_null=True)
    terminals = serializers.IntegerField(min_value=1, default=6)
    components = serializers.IntegerField(min_value=1, default=2)
    out = serializers.CharField(default=None, allow_null=True)

    def validate_alpha(self, value):
        """Alpha as an exact fraction in [1/2, 1]."""
        if value is None:
            return None
        try:
            alpha = Fraction(str(value).strip())
        except (ValueError, ZeroDivisionError):
            raise serializers.ValidationError(f"'{value}' is not a number.")
        if not Fraction(1, 2) <= alpha <= 1:
            raise serializers.ValidationError("alpha must lie in [1/2, 1].")
        return alpha

    def _set_list(self, value, name):
        try:
            return [int(item) for item in parse_list(value)]
        except ValueError:
            raise serializers.ValidationError({name: f"'{value}' is not a list of row numbers."})

    def validate(self, data):
        """
        Exactly one graph source, and alpha or k within range for the
        scheme and the graph size.
        """
        if bool(data['graph']) == bool(data['family']):
            raise serializers.ValidationError("Give exactly one graph source: --graph or --family.")

        if data['graph']:
            try:
                n = parse_graph(Path(data['graph']).read_text())[0].n
            except OSError:
                raise serializers.ValidationError({'graph': f"Cannot read {data['graph']}."})
            except GraphError as exc:
                raise serializers.ValidationError({'graph': str(exc)})
        else:
            n = family_size(data['family'], data)
            if n is None:
                raise serializers.ValidationError(
                    {'family': f"Missing size parameters for the {data['family']} family."}
                )
        data['n'] = n

        if data['scheme'] in ALPHA_SCHEMES:
            if data['alpha'] is None:
                data['alpha'] = Fraction(1)
            data['k'] = None
        else:
            k = 1 if data['k'] is None else data['k']
            log_n = max(1.0, math.log2(n) if n > 1 else 1.0)
            if not 1 <= k <= log_n:
                raise serializers.ValidationError({'k': f"k must lie in 1..log n = {log_n:.2f}, got {k}."})
            data['k'] = k
            data['alpha'] = None

        data['A'] = self._set_list(data['A'], 'A')
        data['B'] = self._set_list(data['B'], 'B')
        return data

    def create(self, validated_data):
        params = {}
        if validated_data['family']:
            params = {key: validated_data[key] for key in FAMILY_KEYS
                      if validated_data.get(key) not in (None, [])}
        return ExperimentConfig(
            scheme=validated_data['scheme'],
            n=validated_data['n'],
            graph=validated_data['graph'],
            family=validated_data['family'],
            params=params,
            alpha=validated_data['alpha'],
            k=validated_data['k'],
            seed=validated_data['seed'],
            bits=validated_data['bits'],
            retries=validated_data['retries'],
            oracle=validated_data['oracle'],
            terminals=validated_data['terminals'],
            components=validated_data['components'],
            out=validated_data['out'],
        )


# ------------------------------------------------------------------------------
# 2. Output serializers (metrics rows, traces, stored runs)
# ------------------------------------------------------------------------------
class MetricsRecordSerializer(serializers.Serializer):
    """Renders a MetricsRecord (or a stored ExperimentRun) as a JSON-ready dict."""
    n = serializers.IntegerField(allow_null=True)
    HD = serializers.IntegerField(allow_null=True)
    WD = serializers.IntegerField(allow_null=True)
    scheme = serializers.CharField()
    alpha = serializers.CharField(allow_null=True)
    k = serializers.IntegerField(allow_null=True)
    L = serializers.IntegerField(allow_null=True)
    seed = serializers.IntegerField(allow_null=True)
    rounds = serializers.IntegerField(allow_null=True)
    messages = serializers.IntegerField(allow_null=True)
    retries = serializers.IntegerField(allow_null=True)
    max_stretch = serializers.FloatField(allow_null=True)
    mean_stretch = serializers.FloatField(allow_null=True)
    max_table_bits = serializers.IntegerField(allow_null=True)
    label_bits = serializers.IntegerField(allow_null=True)
    status = serializers.CharField()
    detail = serializers.CharField(allow_blank=True)


class RoundTraceSerializer(serializers.Serializer):
    rounds = serializers.IntegerField()
    messages = serializers.IntegerField()
    max_bits_edge_round = serializers.IntegerField()
    retries = serializers.IntegerField()
    digest = serializers.CharField(allow_null=True)
    phases = serializers.SerializerMethodField()

    def get_phases(self, obj):
        """Phase labels with the rounds each one took."""
        return [{'phase': label, 'rounds': rounds} for label, rounds in obj.phases]

