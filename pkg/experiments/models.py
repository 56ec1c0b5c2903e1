from django.db import models

from .config import RECORD_FIELDS, MetricsRecord


class ExperimentRun(models.Model):
    """
    One recorded run: the metrics row of a single build plus where the
    graph came from.
    """
    STATUS_CHOICES = [
        ('ok', 'Validated'),
        ('violated', 'Bound violated'),
        ('failed', 'Failed'),
    ]

    source = models.CharField("Graph source", max_length=255)
    scheme = models.CharField("Scheme", max_length=20)
    n = models.PositiveIntegerField("Nodes", null=True, blank=True)
    HD = models.PositiveIntegerField("Hop diameter", null=True, blank=True)
    WD = models.PositiveBigIntegerField("Weighted diameter", null=True, blank=True)
    alpha = models.CharField("Alpha", max_length=20, null=True, blank=True)
    k = models.PositiveIntegerField("k", null=True, blank=True)
    L = models.PositiveIntegerField("Stages", null=True, blank=True)
    seed = models.PositiveIntegerField("Seed", null=True, blank=True)
    rounds = models.PositiveBigIntegerField("Rounds", null=True, blank=True)
    messages = models.PositiveBigIntegerField("Messages", null=True, blank=True)
    retries = models.PositiveIntegerField("Retries", null=True, blank=True)
    max_stretch = models.FloatField("Max stretch", null=True, blank=True)
    mean_stretch = models.FloatField("Mean stretch", null=True, blank=True)
    max_table_bits = models.PositiveBigIntegerField("Max table bits", null=True, blank=True)
    label_bits = models.PositiveBigIntegerField("Label bits", null=True, blank=True)
    status = models.CharField("Status", max_length=10, choices=STATUS_CHOICES, default='ok')
    detail = models.TextField("Detail", blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    def __str__(self):
        return f"{self.scheme} on {self.source} (seed {self.seed}): {self.status}"

    @classmethod
    def from_record(cls, record: MetricsRecord, source: str) -> 'ExperimentRun':
        return cls.objects.create(source=source[:255], **record.to_row())

    def to_record(self) -> MetricsRecord:
        return MetricsRecord(**{name: getattr(self, name) for name in RECORD_FIELDS})

    class Meta:
        verbose_name = "Experiment Run"
        verbose_name_plural = "Experiment Runs"
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['scheme', 'status'], name='experiments_scheme_status_idx'),
        ]
