from django.apps import AppConfig


class SmoothnessConfig(AppConfig):
    name = 'smoothness'
