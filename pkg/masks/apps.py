from django.apps import AppConfig


class MasksConfig(AppConfig):
    name = 'masks'
    verbose_name = 'DOE mask synthesis'
