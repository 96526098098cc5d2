from sqlalchemy import create_engine, Column, Integer, String, Float, DateTime, Text
from sqlalchemy.orm import declarative_base, sessionmaker
from contextlib import contextmanager
import logging

from config import LEDGER_FILENAME
from utils import get_current_time

logger = logging.getLogger(__name__)

Base = declarative_base()

class RunLog(Base):
    __tablename__ = 'run_logs'
    id = Column(Integer, primary_key=True)
    subcommand = Column(String, nullable=False, index=True)
    operator_id = Column(String, nullable=True)  # zoo label or operator file name
    seed = Column(Integer, nullable=True)
    threads = Column(Integer, default=1)
    exit_code = Column(Integer, nullable=False)
    status = Column(String, default='ok')  # ok, config_error, numerical_error, io_error, internal_error
    error = Column(Text, nullable=True)
    report_path = Column(String, nullable=True)
    report_digest = Column(String, nullable=True)  # sha256 of the canonical report text
    elapsed_seconds = Column(Float, default=0.0)
    started_at = Column(DateTime, default=get_current_time)

    def __repr__(self):
        return f"<RunLog {self.id} {self.subcommand} exit={self.exit_code}>"


def default_ledger_url(out_dir):
    return f"sqlite:///{out_dir.rstrip('/')}/{LEDGER_FILENAME}"


def init_db(db_path='sqlite:///ledger.db'):
    engine = create_engine(db_path)
    Base.metadata.create_all(engine)
    return sessionmaker(bind=engine, expire_on_commit=False)

@contextmanager
def get_session_scope(SessionFactory):
    """Transactional scope: commit on success, roll back and re-raise on error."""
    session = SessionFactory()
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()


STATUS_BY_EXIT = {0: 'ok', 1: 'config_error', 2: 'numerical_error', 3: 'io_error', 4: 'internal_error'}


def record_run(session, subcommand, exit_code, *, operator_id=None, seed=None, threads=1, error=None,
               report_path=None, report_digest=None, elapsed_seconds=0.0):
    run = RunLog(
        subcommand=subcommand,
        operator_id=operator_id,
        seed=seed,
        threads=threads,
        exit_code=exit_code,
        status=STATUS_BY_EXIT.get(exit_code, 'error'),
        error=error,
        report_path=report_path,
        report_digest=report_digest,
        elapsed_seconds=elapsed_seconds,
        started_at=get_current_time(),
    )
    session.add(run)
    session.flush()
    logger.debug(f"Ledger: recorded {run!r}")
    return run


def recent_runs(session, subcommand=None, limit=20):
    query = session.query(RunLog)
    if subcommand:
        query = query.filter(RunLog.subcommand == subcommand)
    return query.order_by(RunLog.id.desc()).limit(limit).all()
