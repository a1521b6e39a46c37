from django.apps import AppConfig


class EquilibriaConfig(AppConfig):
    name = 'equilibria'
