# montecarlo/models.py
from django.db import models
import uuid


class ExperimentRun(models.Model):
    """Ledger row for one experiment invocation; mirrors the manifest written next to the artifacts."""

    KINDS = [
        ('istoy', 'Importance sampling toy'),
        ('popmcmc', 'Population MCMC'),
        ('smc-sampler', 'SMC sampler'),
        ('pfilter', 'Particle filter'),
        ('bench', 'Benchmark'),
        ('gendata', 'Data generation'),
        ('compare-precision', 'Precision comparison'),
    ]
    STATUS_CHOICES = [
        ('REQUESTED', 'Requested'),
        ('RUNNING', 'Running'),
        ('COMPLETED', 'Completed'),
        ('FAILED', 'Failed'),
    ]
    PRECISIONS = [
        ('single', 'Single'),
        ('double', 'Double'),
    ]

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    kind = models.CharField(max_length=20, choices=KINDS)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='REQUESTED')

    config = models.JSONField(default=dict)
    config_hash = models.CharField(max_length=64, db_index=True)
    seed = models.BigIntegerField(default=0)
    workers = models.IntegerField(default=1)
    precision = models.CharField(max_length=6, choices=PRECISIONS, default='double')
    generator = models.CharField(max_length=20, default='mrg32k3a')
    out_dir = models.CharField(max_length=500, blank=True)

    wall_clock_seconds = models.FloatField(null=True, blank=True)
    exit_code = models.IntegerField(null=True, blank=True)
    error = models.TextField(blank=True)

    created_at = models.DateTimeField(auto_now_add=True)
    started_at = models.DateTimeField(null=True, blank=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.kind} seed={self.seed} ({self.get_status_display()})"
