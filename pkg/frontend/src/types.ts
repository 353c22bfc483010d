// Wire shapes for the curation HTTP API. Field names mirror the server's
// JSON exactly; keep in sync with the service rather than inventing
// friendlier aliases.

export const STAGES = [
  'detection',
  'ocsr',
  'coreference',
  'markush',
  'measurement',
  'annotation',
] as const;

export type Stage = (typeof STAGES)[number];

export type TaskStatus = 'pending' | 'accepted' | 'edited' | 'rejected';

export type Decision = 'accept' | 'edit' | 'reject' | 'insert';

export interface TaskCounts {
  total: number;
  pending: number;
  accepted: number;
  edited: number;
  rejected: number;
}

export interface StageCounts extends TaskCounts {
  terminal: boolean;
}

export interface RunMeta {
  schema_version: number;
  run_id: string;
  doc_id: string;
  doc_digest: string;
  created: string;
}

export interface RunSummary {
  schema_version: number;
  run_id: string;
  doc_id: string;
  epoch: number;
  export_version: number;
  dirty: Stage[];
  stages: Record<Stage, StageCounts>;
  counts: {
    detections: number;
    structures: number;
    measurements: number;
    triplets: number;
  };
}

export interface DetectionRecord {
  id: number;
  page: number;
  box: number[]; // [x0, y0, x1, y1] in page fractions
  raw_smiles: string | null;
  is_markush: boolean;
}

export interface DetectionTaskPayload {
  detection: DetectionRecord;
  flags: string[];
}

export interface OcsrTaskPayload {
  detection: number;
  page: number;
  box: number[];
  raw_smiles: string | null;
  is_markush: boolean;
}

export interface CoreferenceTaskPayload {
  detection: number;
  coreference: string | null;
}

export interface SubstituentCell {
  kind: string; // abbreviation | fragment_smiles | hydrogen | iupac_name | visual_index | formula
  payload: string;
}

export interface MarkushTaskPayload {
  scaffold_detection: number;
  row: number;
  coreference: string;
  cells: Record<string, SubstituentCell>;
  hydrogen_default_labels: string[];
  enumerated: string | null;
  failure: { cause: string; detail: string } | null;
}

export interface MeasurementJson {
  protein: string;
  ligand_coreference: string;
  assay_type: string;
  relation: string;
  value: string;
  unit: string;
  modality: string;
  provenance: [number, string][];
  uncertainty: string | null;
  range_low: boolean;
  range_high: boolean;
}

export interface MeasurementRecord {
  protein: string;
  ligand_coreference: string;
  assay_type: string;
  relation: string;
  value: string;
  unit: string;
  value_nM: string | null;
  p_value: string | null;
  modality: string;
  provenance: [number, string][];
}

export interface MeasurementTaskPayload {
  index: number;
  inserted: boolean;
  record: MeasurementRecord;
  measurement: MeasurementJson;
}

export interface TripletRecord {
  protein: string;
  smiles: string;
  assay_type: string;
  relation: string;
  value: string;
  unit: string;
  value_nM: string | null;
  p_value: string | null;
  join_key: string;
  provenance: unknown[];
  flags: string[];
}

export interface AnnotationTaskPayload {
  index: number;
  triplet: TripletRecord;
}

export interface ReviewTask {
  schema_version: number;
  id: string;
  run_id: string;
  stage: Stage;
  payload: Record<string, unknown>;
  status: TaskStatus;
  editor: string | null;
  decided_at: string | null;
}

export interface TaskListing {
  schema_version: number;
  run_id: string;
  stage: Stage | null;
  counts: TaskCounts;
  tasks: ReviewTask[];
}

export interface AnnotationCandidate {
  rank: number;
  similarity: number;
  perfect_match: boolean;
  exact_match: boolean;
  triplet: TripletRecord;
}

export interface AnnotationRanking {
  schema_version: number;
  run_id: string;
  query_smiles: string;
  candidates: AnnotationCandidate[];
}
