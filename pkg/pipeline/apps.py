from django.apps import AppConfig


class PipelineConfig(AppConfig):
    name = 'pipeline'
    verbose_name = 'Pipelines, file formats and commands'
