import asyncio
import logging
from collections.abc import Awaitable, Callable

from lilyvoc.domain.values.job import ExtractJob, JobStatus

logger = logging.getLogger(__name__)

type JobHandler = Callable[[ExtractJob], Awaitable[None]]


class ExtractWorker:
    """Consumes extraction jobs from a shared queue.

    Run `start()` once per concurrent consumer; a failing job is marked
    FAILED with its reason and never stops the loop.
    """

    _queue: asyncio.Queue[ExtractJob]
    _running: bool
    _handler: JobHandler

    def __init__(self, handler: JobHandler) -> None:
        self._queue = asyncio.Queue()
        self._running = False
        self._handler = handler

    async def start(self) -> None:
        """Start the worker loop."""
        self._running = True
        logger.debug("Extract worker started.")
        while self._running:
            # Wait for a job.
            job = await self._queue.get()
            try:
                await self._process_job(job)
            except Exception as error:
                logger.error(f"Unexpected error in worker for '{job.stem}': {error}")
            finally:
                self._queue.task_done()

    async def stop(self) -> None:
        """Stop the worker loop."""
        self._running = False

    async def add_job(self, job: ExtractJob) -> None:
        await self._queue.put(job)

    async def join(self) -> None:
        await self._queue.join()

    async def _process_job(self, job: ExtractJob) -> None:
        job.status = JobStatus.RUNNING
        try:
            await self._handler(job)
            job.status = JobStatus.COMPLETED
        except Exception as error:
            logger.exception(f"Skipping '{job.source}'.")
            job.status = JobStatus.FAILED
            job.message = str(error)


async def run_jobs(
    jobs: list[ExtractJob], handler: JobHandler, workers: int
) -> list[ExtractJob]:
    """Process `jobs` with `workers` concurrent consumers and wait for all."""
    worker = ExtractWorker(handler)
    consumers = [asyncio.create_task(worker.start()) for _ in range(workers)]
    for job in jobs:
        await worker.add_job(job)
    try:
        await worker.join()
    finally:
        await worker.stop()
        for consumer in consumers:
            _ = consumer.cancel()
        _ = await asyncio.gather(*consumers, return_exceptions=True)
    return jobs
