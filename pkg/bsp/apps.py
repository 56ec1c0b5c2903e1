from django.apps import AppConfig


class BspConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'bsp'
    verbose_name = 'Bounded shortest paths'
