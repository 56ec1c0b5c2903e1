from django.contrib import admin

from .models import ExperimentRun


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    """Read-only browser for recorded runs."""
    list_display = [
        'scheme', 'source', 'n', 'alpha', 'k', 'seed',
        'rounds', 'max_stretch', 'max_table_bits', 'status', 'created_at'
    ]
    list_filter = ['scheme', 'status']
    search_fields = ['source', 'detail']
    ordering = ['-created_at']
    readonly_fields = ['created_at']

    fieldsets = (
        ('Run', {
            'fields': ('source', 'scheme', 'alpha', 'k', 'L', 'seed')
        }),
        ('Graph', {
            'fields': ('n', 'HD', 'WD')
        }),
        ('Cost', {
            'fields': ('rounds', 'messages', 'retries', 'max_table_bits', 'label_bits')
        }),
        ('Quality', {
            'fields': ('max_stretch', 'mean_stretch', 'status', 'detail', 'created_at'),
            'description': 'Stretch is empty when the run had oracle checks off'
        }),
    )

    def has_add_permission(self, request):
        """Runs are recorded by the management commands only"""
        return False
