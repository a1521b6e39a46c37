import csv

from rest_framework import serializers

from core.serializers import ProfileField


def dashed(values):
    return '-'.join(str(v) for v in values)


class TraceStepSerializer(serializers.Serializer):
    t = serializers.IntegerField()
    coalition = serializers.ListField(child=serializers.IntegerField(), source='coalition.members')
    profile = ProfileField()
    welfare = serializers.FloatField()
    potential = serializers.FloatField(allow_null=True)


class DynamicsTraceSerializer(serializers.Serializer):
    seed = serializers.IntegerField()
    generator = serializers.CharField()
    mode = serializers.CharField()
    initial = ProfileField()
    initial_welfare = serializers.FloatField()
    empirical_mean_welfare = serializers.FloatField()
    steps = TraceStepSerializer(many=True)


class SinkClassSerializer(serializers.Serializer):
    states = serializers.ListField(child=ProfileField())
    stationary = serializers.ListField(child=serializers.FloatField())
    expected_welfare = serializers.FloatField()
    residual = serializers.FloatField()


class DriftReportSerializer(serializers.Serializer):
    holds = serializers.BooleanField(allow_null=True)
    min_margin = serializers.FloatField(allow_null=True)
    worst_state = ProfileField(allow_null=True)
    reason = serializers.CharField(allow_blank=True)


class ChainAnalysisSerializer(serializers.Serializer):
    states = serializers.SerializerMethodField()
    sinks = SinkClassSerializer(many=True)
    threshold = serializers.FloatField(allow_null=True)
    threshold_reason = serializers.CharField(allow_blank=True)
    bound_holds = serializers.BooleanField(allow_null=True)

    def get_states(self, chain):
        return len(chain.states)


class EmpiricalBoundReportSerializer(serializers.Serializer):
    seed = serializers.IntegerField()
    steps = serializers.IntegerField()
    mean_welfare = serializers.FloatField()
    threshold = serializers.FloatField()
    margin = serializers.FloatField()
    passed = serializers.BooleanField()


class EmpiricalBoundSweepSerializer(serializers.Serializer):
    min_margin = serializers.FloatField()
    worst_seed = serializers.IntegerField()
    passed = serializers.BooleanField()
    reports = EmpiricalBoundReportSerializer(many=True)


def write_trace(trace, stream, bound=None):
    """Trace CSV; comment lines carry what a replay needs, and the empirical bound when given."""
    stream.write(f"# seed: {trace.seed}\n")
    stream.write(f"# generator: {trace.generator}\n")
    stream.write(f"# mode: {trace.mode}\n")
    stream.write(f"# initial: {dashed(trace.initial)}\n")
    if bound is not None:
        stream.write(f"# threshold: {bound.threshold!r}\n")
        stream.write(f"# mean_welfare: {bound.mean_welfare!r}\n")
        stream.write(f"# margin: {bound.margin!r}\n")
        stream.write(f"# passed: {str(bound.passed).lower()}\n")
    writer = csv.writer(stream, lineterminator='\n')
    header = ['t', 'coalition', 'profile', 'welfare']
    if trace.has_potential:
        header.append('potential')
    writer.writerow(header)
    for step in trace.steps:
        row = [step.t, dashed(step.coalition.members), dashed(step.profile), repr(step.welfare)]
        if trace.has_potential:
            row.append(repr(step.potential))
        writer.writerow(row)
