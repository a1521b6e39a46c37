from rest_framework import serializers
from rest_framework.renderers import JSONRenderer


class ProfileField(serializers.ListField):
    """Strategy indices; null marks players a partial profile leaves open."""
    child = serializers.IntegerField(min_value=0, allow_null=True)


def render_json(data) -> str:
    return JSONRenderer().render(data, renderer_context={'indent': 2}).decode() + '\n'
