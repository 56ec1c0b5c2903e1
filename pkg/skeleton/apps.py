from django.apps import AppConfig


class SkeletonConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'skeleton'
    verbose_name = 'Skeleton spanner'
